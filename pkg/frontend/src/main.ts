/** Browser entry: resolve the server location and boot the dashboard.
 *
 * Default server is the page's own host (the live service can serve
 * this bundle); `?server=host:port` points elsewhere, e.g.
 * `index.html?server=127.0.0.1:8765` during development.
 */

import { Dashboard } from "./dashboard";

function serverBase(): string {
  const q = new URLSearchParams(location.search).get("server");
  if (q) return q.replace(/^(https?|wss?):\/\//, "").replace(/\/$/, "");
  if (location.host) return location.host;
  return "127.0.0.1:8765";
}

const base = serverBase();
const secure = location.protocol === "https:";
const root = document.getElementById("app");
if (!root) throw new Error("missing #app element");

const dash = new Dashboard({
  root,
  wsUrl: `${secure ? "wss" : "ws"}://${base}/ws`,
  healthUrl: `${secure ? "https" : "http"}://${base}/health`,
});
dash.start();

declare global {
  interface Window { dashboard?: Dashboard }
}
window.dashboard = dash; // console access for poking around
