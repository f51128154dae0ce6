/** DOM rendering. All corpus text lands via textContent, never innerHTML. */

import { GroupLink, SearchResult } from "./api.js";
import { groupPath } from "./router.js";
import { UiState } from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

/** In-app link; app.ts intercepts clicks on [data-nav] anchors. */
function navLink(href: string, text: string, className?: string): HTMLAnchorElement {
  const link = el("a", className, text);
  link.href = href;
  link.dataset.nav = "";
  return link;
}

function scoreBar(label: string, value: number): HTMLElement {
  const clamped = Math.max(0, Math.min(1, value));
  const row = el("div", "score-row");
  row.appendChild(el("span", "score-label", label));
  const track = el("div", "score-track");
  const fill = el("div", "score-fill");
  fill.style.width = `${(clamped * 100).toFixed(1)}%`;
  track.appendChild(fill);
  row.appendChild(track);
  row.appendChild(el("span", "score-value", value.toFixed(3)));
  return row;
}

function resultCard(result: SearchResult): HTMLElement {
  const card = el("article", "card");
  card.dataset.groupId = String(result.id);

  const title = el("h3");
  title.appendChild(navLink(groupPath(result.id), result.primary_decl_name, "card-title"));
  card.appendChild(title);

  const meta = el("p", "card-meta");
  meta.appendChild(el("span", "badge", result.package));
  meta.appendChild(el("span", "file", result.source_file));
  card.appendChild(meta);

  const statement = el("pre", "statement");
  statement.appendChild(el("code", undefined, result.statement_text));
  card.appendChild(statement);

  if (result.docstring) {
    card.appendChild(el("p", "docstring", result.docstring));
  }
  if (result.informal_description) {
    card.appendChild(el("p", "informal", result.informal_description));
  }

  const scores = el("div", "scores");
  scores.appendChild(scoreBar("semantic", result.scores.semantic));
  scores.appendChild(scoreBar("lexical", result.scores.lexical));
  scores.appendChild(scoreBar("pagerank", result.scores.pagerank));
  scores.appendChild(el("p", "total", `total ${result.scores.total.toFixed(4)}`));
  card.appendChild(scores);

  return card;
}

function linkList(heading: string, links: GroupLink[], className: string): HTMLElement {
  const section = el("section", className);
  section.appendChild(el("h3", undefined, heading));
  if (links.length === 0) {
    section.appendChild(el("p", "empty", "none"));
    return section;
  }
  const list = el("ul");
  for (const link of links) {
    const item = el("li");
    item.appendChild(navLink(groupPath(link.id), link.primary_decl_name));
    list.appendChild(item);
  }
  section.appendChild(list);
  return section;
}

function renderSearchView(state: UiState, main: HTMLElement): void {
  if (state.loading) {
    main.appendChild(el("p", "loading", "Searching…"));
    return;
  }
  if (!state.response) {
    main.appendChild(el("p", "hint", "Type a query to search the corpus."));
    return;
  }
  if (state.response.results.length === 0) {
    main.appendChild(el("p", "empty", `No results for "${state.response.query}".`));
    return;
  }
  const list = el("div", "results");
  for (const result of state.response.results) {
    list.appendChild(resultCard(result));
  }
  main.appendChild(list);
}

function renderGroupView(state: UiState, main: HTMLElement): void {
  if (state.loading || !state.group) {
    main.appendChild(el("p", "loading", "Loading group…"));
    return;
  }
  const group = state.group;
  const view = el("article", "group-view");

  view.appendChild(el("h2", undefined, group.primary_decl_name));
  const meta = el("p", "card-meta");
  meta.appendChild(el("span", "badge", group.package));
  meta.appendChild(
    el("span", "file", `${group.source_file} (lines ${group.span.start_line}-${group.span.end_line})`),
  );
  view.appendChild(meta);

  const statement = el("pre", "statement");
  statement.appendChild(el("code", undefined, group.statement_text));
  view.appendChild(statement);

  if (group.docstring) {
    view.appendChild(el("p", "docstring", group.docstring));
  }
  if (group.informal_description) {
    view.appendChild(el("p", "informal", group.informal_description));
  }

  const members = el("section", "members");
  members.appendChild(el("h3", undefined, "Members"));
  const memberList = el("ul");
  for (const member of group.members) {
    memberList.appendChild(el("li", undefined, `${member.kind} ${member.lean_name}`));
  }
  members.appendChild(memberList);
  view.appendChild(members);

  if (state.deps) {
    view.appendChild(linkList("Dependencies", state.deps.dependencies, "dependencies"));
    view.appendChild(linkList("Dependents", state.deps.dependents, "dependents"));
  }

  view.appendChild(navLink("/", "← back to search", "back-link"));
  main.appendChild(view);
}

function renderNotFound(id: number, main: HTMLElement): void {
  const view = el("div", "not-found");
  view.appendChild(el("h2", undefined, "Not found"));
  view.appendChild(el("p", undefined, `No group with id ${id}.`));
  view.appendChild(navLink("/", "← back to search", "back-link"));
  main.appendChild(view);
}

/** Re-render the dynamic region. The form skeleton lives outside `main`. */
export function renderMain(state: UiState, main: HTMLElement): void {
  main.textContent = "";
  if (state.error) {
    main.appendChild(el("div", "error-banner", state.error));
  }
  switch (state.view.kind) {
    case "search":
      renderSearchView(state, main);
      break;
    case "group":
      renderGroupView(state, main);
      break;
    case "not-found":
      renderNotFound(state.view.id, main);
      break;
  }
}
