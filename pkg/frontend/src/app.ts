/** Wires store, router, and rendering into a root element. */

import { ApiClient } from "./api.js";
import { renderMain } from "./render.js";
import { Router } from "./router.js";
import { AppStore, DEFAULT_LIMIT } from "./state.js";

export interface AppOptions {
  baseUrl?: string;
  window?: Window;
}

export interface AppHandle {
  store: AppStore;
  router: Router;
}

const LIMIT_CHOICES = [10, 25, DEFAULT_LIMIT];

export function createApp(root: HTMLElement, options: AppOptions = {}): AppHandle {
  const win = options.window ?? window;
  const api = new ApiClient(options.baseUrl ?? "");
  const store = new AppStore(api);

  root.textContent = "";

  const header = document.createElement("header");
  const heading = document.createElement("h1");
  heading.textContent = "declsearch";
  header.appendChild(heading);

  const form = document.createElement("form");
  form.className = "search-form";

  const input = document.createElement("input");
  input.type = "search";
  input.name = "q";
  input.placeholder = "Search declarations…";
  input.setAttribute("aria-label", "search query");
  form.appendChild(input);

  const packageSelect = document.createElement("select");
  packageSelect.multiple = true;
  packageSelect.name = "packages";
  packageSelect.setAttribute("aria-label", "packages");
  form.appendChild(packageSelect);

  const limitSelect = document.createElement("select");
  limitSelect.name = "limit";
  limitSelect.setAttribute("aria-label", "result limit");
  for (const choice of LIMIT_CHOICES) {
    const option = document.createElement("option");
    option.value = String(choice);
    option.textContent = String(choice);
    if (choice === DEFAULT_LIMIT) {
      option.selected = true;
    }
    limitSelect.appendChild(option);
  }
  form.appendChild(limitSelect);

  const submit = document.createElement("button");
  submit.type = "submit";
  submit.textContent = "Search";
  form.appendChild(submit);

  const validation = document.createElement("p");
  validation.className = "validation";
  validation.hidden = true;

  header.appendChild(form);
  header.appendChild(validation);
  root.appendChild(header);

  const main = document.createElement("main");
  root.appendChild(main);

  function syncPackageOptions(): void {
    const selected = new Set(
      Array.from(packageSelect.selectedOptions, (option) => option.value),
    );
    packageSelect.textContent = "";
    for (const name of store.state.availablePackages) {
      const option = document.createElement("option");
      option.value = name;
      option.textContent = name;
      option.selected = selected.has(name);
      packageSelect.appendChild(option);
    }
  }

  store.subscribe(() => {
    form.hidden = store.state.view.kind !== "search";
    validation.hidden = store.state.validation === null;
    validation.textContent = store.state.validation ?? "";
    syncPackageOptions();
    renderMain(store.state, main);
  });

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    store.setSelectedPackages(
      Array.from(packageSelect.selectedOptions, (option) => option.value),
    );
    store.setLimit(Number(limitSelect.value));
    void store.submitSearch(input.value);
  });

  const router = new Router(win, (route) => {
    if (route.kind === "group") {
      void store.openGroup(route.id);
    } else {
      store.showSearch();
    }
  });

  // One delegated handler covers result titles, dependency links, and back links.
  root.addEventListener("click", (event) => {
    const target = event.target as HTMLElement | null;
    const anchor = target?.closest<HTMLAnchorElement>("a[data-nav]");
    if (anchor) {
      event.preventDefault();
      router.navigate(anchor.getAttribute("href") ?? "/");
    }
  });

  void store.loadPackages();
  router.dispatch();

  return { store, router };
}
