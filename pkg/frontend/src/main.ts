// Entry point: pick the API base, mount the console.
//
// The page is static and can be served from anywhere; point it at the
// analysis service with ?api=http://127.0.0.1:8000 (defaults to the page's
// own origin). The session id lives in the URL fragment only.

import { ApiClient } from "./api.js";
import { mountConsole } from "./ui.js";

const params = new URLSearchParams(window.location.search);
const base = params.get("api") ?? `${window.location.protocol}//${window.location.host}`;
const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app mount point");
}
mountConsole(root, new ApiClient(base));
