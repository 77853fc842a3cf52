import { ApiClient } from "./api.js";
import { mountPanels } from "./panels.js";
import { subscribeEvents } from "./sse.js";
import { Store } from "./store.js";

// the console is served statically; the harness address defaults to the
// standard service port on the same host and can be overridden with ?api=
const params = new URLSearchParams(location.search);
const base = params.get("api") ?? `${location.protocol}//${location.hostname}:8765`;

const api = new ApiClient(base);
const store = new Store(api);

const host = document.getElementById("app");
if (!host) throw new Error("missing #app container");
mountPanels(host, store);

store.init().catch((e) => {
  console.error("initial load failed", e);
});

subscribeEvents(base, (ev) => void store.handleEvent(ev), {
  onStatus: (s) => store.setConnection(s),
});
