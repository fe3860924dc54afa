import { ApiClient } from "./api.js";
import { App } from "./app.js";

declare global {
  interface Window {
    __API_BASE__?: string;
  }
}

const base = window.__API_BASE__ ?? "";
const root = document.getElementById("app");
if (root) {
  void new App(root, new ApiClient(base)).start();
}
