import { CubeClient } from "./api.js";
import { render } from "./panels.js";
import { ExplorerStore } from "./state.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");

const store = new ExplorerStore(new CubeClient(""));
store.subscribe((state) => render(root, state, store));
render(root, store.state, store);
