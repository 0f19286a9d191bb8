import { ApiClient } from "./api.js";
import { JudgeApp } from "./app.js";

const params = new URLSearchParams(window.location.search);
const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app container");
}
const app = new JudgeApp(root, new ApiClient(""));
const seedParam = params.get("seed");
void app.start(params.get("scene") ?? undefined, seedParam ? Number(seedParam) : undefined);
