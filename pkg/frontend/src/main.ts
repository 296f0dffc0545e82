import { mount } from "./app.js";

const root = document.getElementById("app");
if (root) {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("api") ?? "";
  const formulation = params.get("formulation") ?? "location";
  const console_ = mount(root, base);
  void console_.start(formulation);
}
