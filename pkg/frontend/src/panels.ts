/**
 * DOM panels for the explorer: load/build forms, cube operations with
 * undo, the heat-shaded cell grid, the per-type activity-filter matrix,
 * threshold/mode controls, and the two model panes (whole cube left,
 * selected cell right) rendered from the server's DOT documents.
 */

import { ModelDoc } from "./api.js";
import { parseDot, renderSvg } from "./dot.js";
import { ExplorerState, ExplorerStore } from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) {
    if (k === "class") node.className = v;
    else node.setAttribute(k, v);
  }
  for (const child of children) node.append(child);
  return node;
}

function panel(title: string, id: string, children: (Node | string)[]): HTMLElement {
  return el("section", { class: "panel", id }, [el("h2", {}, [title]), ...children]);
}

// ------------------------------------------------------------------ loading

function uploadPanel(state: ExplorerState, store: ExplorerStore): HTMLElement {
  const file = el("input", { type: "file", id: "log-file" });
  const format = el("select", { id: "log-format" });
  for (const fmt of ["ocel", "csv", "xes"]) format.append(el("option", { value: fmt }, [fmt]));
  const mapping = el("textarea", {
    id: "csv-mapping",
    placeholder: '{"case_column": "case", "activity_column": "activity", "timestamp_column": "time"}',
  });
  const button = el("button", { id: "load-log" }, ["Load log"]);
  button.addEventListener("click", () => {
    const chosen = (file as HTMLInputElement).files?.[0];
    if (!chosen) return;
    let mappingDoc: object | undefined;
    const text = (mapping as HTMLTextAreaElement).value.trim();
    if (text) mappingDoc = JSON.parse(text);
    void store.loadLog(chosen, chosen.name, (format as HTMLSelectElement).value, mappingDoc);
  });
  const summary = state.session
    ? el("p", { class: "summary" }, [
        `${state.session.events} events · types: ${state.session.object_types.join(", ")}`,
      ])
    : el("p", { class: "summary muted" }, ["no log loaded"]);
  return panel("Event log", "upload-panel", [file, format, mapping, button, summary]);
}

function dimensionsPanel(state: ExplorerState, store: ExplorerStore): HTMLElement {
  if (!state.session) return panel("Cube", "dimensions-panel", [el("p", { class: "muted" }, ["load a log first"])]);
  const session = state.session;
  const boxes: HTMLInputElement[] = [];
  const list = el("div", { class: "checkbox-grid" });
  const selected = new Set(state.structure?.dimensions.map((d) => d.name) ?? []);
  for (const name of [...session.attributes, ...session.object_types].sort()) {
    const box = el("input", { type: "checkbox", "data-dimension": name }) as HTMLInputElement;
    box.checked = selected.size ? selected.has(name) : name !== "timestamp";
    boxes.push(box);
    list.append(el("label", {}, [box, ` ${name}`]));
  }
  const build = el("button", { id: "build-cube" }, ["Build cube"]);
  build.addEventListener("click", () => {
    const dims = boxes.filter((b) => b.checked).map((b) => b.getAttribute("data-dimension")!);
    void store.buildCube(dims);
  });
  return panel("Cube", "dimensions-panel", [list, build]);
}

// --------------------------------------------------------------- operations

function labelsFor(state: ExplorerState, dimension: string): string[] {
  const seen = new Set<string>();
  for (const cell of state.cells?.cells ?? []) {
    const label = cell.coords[dimension];
    if (label !== undefined) seen.add(label);
  }
  return [...seen].sort();
}

function opsPanel(state: ExplorerState, store: ExplorerStore): HTMLElement {
  if (!state.view) return panel("Operations", "ops-panel", [el("p", { class: "muted" }, ["build a cube first"])]);
  const view = state.view;

  const dimSelect = el("select", { id: "op-dimension" });
  for (const d of view.selected) dimSelect.append(el("option", { value: d }, [d]));

  const memberSelect = el("select", { id: "op-member", multiple: "multiple", size: "5" });
  const fillMembers = () => {
    memberSelect.textContent = "";
    for (const label of labelsFor(state, (dimSelect as HTMLSelectElement).value)) {
      memberSelect.append(el("option", { value: label }, [label]));
    }
  };
  dimSelect.addEventListener("change", fillMembers);
  fillMembers();

  const sliceButton = el("button", { id: "op-slice" }, ["Slice"]);
  sliceButton.addEventListener("click", () => {
    const member = (memberSelect as HTMLSelectElement).value;
    if (member) void store.apply({ op: "slice", dimension: (dimSelect as HTMLSelectElement).value, member });
  });

  const diceButton = el("button", { id: "op-dice" }, ["Dice"]);
  diceButton.addEventListener("click", () => {
    const chosen = [...(memberSelect as HTMLSelectElement).selectedOptions].map((o) => o.value);
    if (chosen.length) {
      void store.apply({ op: "dice", filter: { [(dimSelect as HTMLSelectElement).value]: chosen } });
    }
  });

  const levelSelect = el("select", { id: "op-level" });
  const levels = state.structure?.dimensions.find((d) => d.name === (dimSelect as HTMLSelectElement).value)?.levels;
  for (const name of Object.keys(levels ?? {})) levelSelect.append(el("option", { value: name }, [name]));
  dimSelect.addEventListener("change", () => {
    levelSelect.textContent = "";
    const dim = state.structure?.dimensions.find((d) => d.name === (dimSelect as HTMLSelectElement).value);
    for (const name of Object.keys(dim?.levels ?? {})) levelSelect.append(el("option", { value: name }, [name]));
  });

  const granButton = el("button", { id: "op-granularity" }, ["Change granularity"]);
  granButton.addEventListener("click", () => {
    void store.apply({
      op: "change-granularity",
      dimension: (dimSelect as HTMLSelectElement).value,
      level: (levelSelect as HTMLSelectElement).value,
    });
  });

  const undoButton = el("button", { id: "op-undo" }, ["Undo"]);
  undoButton.addEventListener("click", () => void store.apply({ op: "undo" }));

  const chips = el("div", { class: "chips", id: "dimension-chips" });
  for (const d of view.selected) {
    chips.append(el("span", { class: "chip", "data-dimension": d }, [`${d} (${view.sel_sizes[d]})`]));
  }

  return panel("Operations", "ops-panel", [
    chips,
    el("div", { class: "row" }, [dimSelect, memberSelect]),
    el("div", { class: "row" }, [sliceButton, diceButton, levelSelect, granButton, undoButton]),
  ]);
}

// ---------------------------------------------------------------- cell grid

function cellGrid(state: ExplorerState, store: ExplorerStore): HTMLElement {
  if (!state.cells) return panel("Cells", "cell-grid", [el("p", { class: "muted" }, ["build a cube first"])]);
  const cells = state.cells;
  const max = Math.max(1, ...cells.cells.map((c) => c.events));
  const dims = state.view?.selected ?? [];
  const table = el("table", { class: "cells" });
  const head = el("tr", {}, [...dims.map((d) => el("th", {}, [d])), el("th", {}, ["events"])]);
  table.append(head);
  for (const cell of cells.cells) {
    const row = el("tr", { class: "cell-row", "data-coords": JSON.stringify(cell.coords) });
    const selected =
      state.selectedCell !== null && JSON.stringify(state.selectedCell) === JSON.stringify(cell.coords);
    if (selected) row.classList.add("selected");
    for (const d of dims) row.append(el("td", {}, [cell.coords[d] ?? ""]));
    const heat = el("td", { class: "heat" }, [String(cell.events)]);
    heat.style.background = `rgba(31,119,180,${(0.1 + (0.7 * cell.events) / max).toFixed(3)})`;
    row.append(heat);
    row.addEventListener("click", () => void store.selectCell(cell.coords));
    table.append(row);
  }
  const deselect = el("button", { id: "deselect-cell" }, ["Whole cube"]);
  deselect.addEventListener("click", () => void store.selectCell(null));
  const counts = el("p", { class: "summary" }, [
    `${cells.total_cells} occupied cells (space ${cells.cell_space}) · page ${cells.page}`,
  ]);
  return panel("Cells", "cell-grid", [counts, deselect, table]);
}

// ------------------------------------------------------------- filter matrix

function filterPanel(state: ExplorerState, store: ExplorerStore): HTMLElement {
  if (!state.session) return panel("Activity filter", "filter-panel", []);
  const session = state.session;
  const table = el("table", { class: "filter-matrix" });
  table.append(
    el("tr", {}, [el("th", {}, ["activity"]), ...session.object_types.map((ot) => el("th", {}, [ot]))]),
  );
  for (const activity of session.activities) {
    const row = el("tr", {});
    row.append(el("td", {}, [activity]));
    for (const ot of session.object_types) {
      const box = el("input", {
        type: "checkbox",
        "data-ot": ot,
        "data-activity": activity,
      }) as HTMLInputElement;
      box.checked = (state.filter[ot] ?? []).includes(activity);
      box.addEventListener("change", () => void store.toggleActivity(ot, activity, box.checked));
      row.append(el("td", {}, [box]));
    }
    table.append(row);
  }
  return panel("Activity filter", "filter-panel", [table]);
}

// ------------------------------------------------------------- model panes

function modelPane(id: string, title: string, doc: ModelDoc | null, placeholder: string): HTMLElement {
  const body = el("div", { class: "pane-body" });
  if (doc === null) {
    body.append(el("div", { class: "empty-model placeholder" }, [placeholder]));
  } else if (doc.nodes.length === 0) {
    body.append(el("div", { class: "empty-model placeholder" }, ["no activities survive the current filters"]));
  } else {
    body.innerHTML = renderSvg(parseDot(doc.dot));
  }
  return el("section", { class: "panel pane", id }, [el("h2", {}, [title]), body]);
}

function comparePanes(state: ExplorerState): HTMLElement {
  const whole = modelPane("whole-pane", "Whole cube", state.models?.whole ?? null, "load a log and build a cube");
  const cellDoc = state.models?.cell ?? null;
  const cell = modelPane(
    "cell-pane",
    state.selectedCell ? `Cell ${JSON.stringify(state.selectedCell)}` : "Cell",
    state.selectedCell ? cellDoc : null,
    "select a cell to compare",
  );
  const legend = el("div", { class: "legend", id: "color-legend" });
  for (const [ot, color] of Object.entries(state.models?.palette ?? {})) {
    const swatch = el("span", { class: "swatch", "data-ot": ot });
    swatch.style.background = color;
    legend.append(el("span", { class: "legend-item" }, [swatch, ` ${ot}`]));
  }
  return el("div", { class: "compare" }, [whole, cell, legend]);
}

// ---------------------------------------------------------------- thresholds

function thresholdPanel(state: ExplorerState, store: ExplorerStore): HTMLElement {
  const node = el("input", {
    type: "range",
    id: "min-node-freq",
    min: "0",
    max: "200",
    value: String(state.minNodeFreq),
  });
  const nodeOut = el("span", { class: "value" }, [String(state.minNodeFreq)]);
  node.addEventListener("change", () =>
    void store.setThresholds(Number((node as HTMLInputElement).value), state.minEdgeFreq),
  );
  const edge = el("input", {
    type: "range",
    id: "min-edge-freq",
    min: "0",
    max: "200",
    value: String(state.minEdgeFreq),
  });
  const edgeOut = el("span", { class: "value" }, [String(state.minEdgeFreq)]);
  edge.addEventListener("change", () =>
    void store.setThresholds(state.minNodeFreq, Number((edge as HTMLInputElement).value)),
  );

  const toggle = el("button", { id: "mode-toggle" }, [
    state.mode === "frequency" ? "Show performance" : "Show frequency",
  ]);
  toggle.addEventListener("click", () =>
    void store.setMode(state.mode === "frequency" ? "performance" : "frequency"),
  );

  const exportDot = el("a", { id: "export-dot", href: store.exportUrl("dot"), download: "model.dot" }, [
    "Export DOT",
  ]);
  const exportDump = el("a", { id: "export-dump", href: store.exportUrl("dump"), download: "cube.dump.json" }, [
    "Export dump",
  ]);

  return panel("Thresholds & mode", "threshold-panel", [
    el("label", {}, ["min node frequency ", node, nodeOut]),
    el("label", {}, ["min edge frequency ", edge, edgeOut]),
    el("div", { class: "row" }, [toggle, exportDot, exportDump]),
  ]);
}

// ------------------------------------------------------------------- render

export function render(root: HTMLElement, state: ExplorerState, store: ExplorerStore): void {
  root.textContent = "";
  if (state.error) root.append(el("div", { class: "error", id: "error-bar" }, [state.error]));
  if (state.busy) root.append(el("div", { class: "busy", id: "busy-bar" }, ["working..."]));
  root.append(
    el("div", { class: "sidebar" }, [
      uploadPanel(state, store),
      dimensionsPanel(state, store),
      opsPanel(state, store),
      filterPanel(state, store),
      thresholdPanel(state, store),
    ]),
  );
  root.append(el("div", { class: "main" }, [cellGrid(state, store), comparePanes(state)]));
}
