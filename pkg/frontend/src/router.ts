/** History-API routing: "/" is the search page, "/group/{id}" a group view. */

export type Route = { kind: "search" } | { kind: "group"; id: number };

export function parseRoute(pathname: string): Route {
  const match = /^\/group\/(\d+)$/.exec(pathname);
  if (match) {
    return { kind: "group", id: Number(match[1]) };
  }
  return { kind: "search" };
}

export function groupPath(id: number): string {
  return `/group/${id}`;
}

export class Router {
  constructor(
    private readonly win: Window,
    private readonly onRoute: (route: Route) => void,
  ) {
    win.addEventListener("popstate", () => this.dispatch());
  }

  navigate(path: string): void {
    this.win.history.pushState(null, "", path);
    this.dispatch();
  }

  dispatch(): void {
    this.onRoute(parseRoute(this.win.location.pathname));
  }
}
