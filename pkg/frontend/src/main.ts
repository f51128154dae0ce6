import { createApp } from "./app.js";

const root = document.getElementById("app");
if (root) {
  const base = (window as { DECLSEARCH_API_BASE?: string }).DECLSEARCH_API_BASE;
  createApp(root, { baseUrl: base ?? "" });
}
