import { startApp } from "./app.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("engine") ?? "http://127.0.0.1:8000";

startApp(baseUrl).catch((error) => {
  const node = document.getElementById("overlay-errors");
  if (node) node.textContent = `failed to start: ${String(error)}`;
});
