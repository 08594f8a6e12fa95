/**
 * End-to-end acceptance for the explorer against a live service: load the
 * synthetic purchasing log, build a cube, slice on time, select a cell,
 * and verify the rendered panes byte-match the server's model responses.
 */

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { CubeClient, ModelDoc } from "../src/api.js";
import { render } from "../src/panels.js";
import { ExplorerStore } from "../src/state.js";

const PORT = 8320 + (process.pid % 400);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
let logBytes: Uint8Array;

async function waitForServer(): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt += 1) {
    try {
      const response = await fetch(`${BASE}/openapi.json`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  throw new Error("service did not come up");
}

beforeAll(async () => {
  const dir = mkdtempSync(join(tmpdir(), "occube-ui-"));
  const logPath = join(dir, "p2p.ocel.json");
  const gen = spawnSync(
    "python3",
    ["-m", "occube.cli", "gen", "--events", "300", "--object-types", "3", "--attributes", "2",
     "--fan-out", "2", "--seed", "11", "--out", logPath],
    { encoding: "utf-8" },
  );
  if (gen.status !== 0) throw new Error(`gen failed: ${gen.stderr}`);
  logBytes = readFileSync(logPath);

  server = spawn("python3", ["-m", "occube.cli", "serve", "--port", String(PORT)], { stdio: "ignore" });
  await waitForServer();
}, 60_000);

afterAll(() => {
  server?.kill("SIGTERM");
});

function paneSets(pane: Element): string {
  const nodes = [...pane.querySelectorAll("g.node")]
    .map((g) => ({
      activity: g.getAttribute("data-activity")!,
      frequency: Number(g.getAttribute("data-freq")),
    }))
    .sort((a, b) => a.activity.localeCompare(b.activity));
  const edges = [...pane.querySelectorAll("g.edge")]
    .map((g) => ({
      source: g.getAttribute("data-source")!,
      target: g.getAttribute("data-target")!,
      object_type: g.getAttribute("data-ot")!,
      frequency: Number(g.getAttribute("data-freq")),
    }))
    .sort((a, b) =>
      `${a.source}|${a.target}|${a.object_type}`.localeCompare(`${b.source}|${b.target}|${b.object_type}`),
    );
  return JSON.stringify({ nodes, edges });
}

function docSets(doc: ModelDoc): string {
  const nodes = [...doc.nodes]
    .map((n) => ({ activity: n.activity, frequency: n.frequency }))
    .sort((a, b) => a.activity.localeCompare(b.activity));
  const edges = [...doc.edges]
    .map((e) => ({ source: e.source, target: e.target, object_type: e.object_type, frequency: e.frequency }))
    .sort((a, b) =>
      `${a.source}|${a.target}|${a.object_type}`.localeCompare(`${b.source}|${b.target}|${b.object_type}`),
    );
  return JSON.stringify({ nodes, edges });
}

describe("explorer comparison flow", () => {
  it("slices on time, selects a cell, and renders panes that match the service", async () => {
    const store = new ExplorerStore(new CubeClient(BASE));
    const root = document.createElement("div");
    document.body.append(root);
    store.subscribe((state) => render(root, state, store));

    await store.loadLog(new Blob([logBytes]), "p2p.ocel.json", "ocel");
    expect(store.state.error).toBeNull();
    expect(store.state.session?.events).toBe(300);

    await store.buildCube(["activity", "timestamp", "order"]);
    expect(store.state.error).toBeNull();
    expect(store.state.view?.selected).toEqual(["activity", "order", "timestamp"]);

    // slice on time: pick a year label straight from the cell grid
    const yearLabel = store.state.cells!.cells[0].coords["timestamp"];
    await store.apply({ op: "slice", dimension: "timestamp", member: yearLabel });
    expect(store.state.error).toBeNull();
    expect(store.state.view?.selected).toEqual(["activity", "order"]);
    expect(root.querySelector('#dimension-chips [data-dimension="timestamp"]')).toBeNull();

    // select the first occupied cell
    const coords = store.state.cells!.cells[0].coords;
    await store.selectCell(coords);
    const models = store.state.models!;
    expect(models.scope).toBe("cell");
    expect(models.cell).not.toBeNull();

    // both panes byte-match the service's node/edge sets
    const whole = root.querySelector("#whole-pane")!;
    const cell = root.querySelector("#cell-pane")!;
    expect(paneSets(whole)).toBe(docSets(models.whole));
    expect(paneSets(cell)).toBe(docSets(models.cell!));

    // colors follow the server palette in both panes
    for (const pane of [whole, cell]) {
      for (const edge of pane.querySelectorAll("g.edge")) {
        const ot = edge.getAttribute("data-ot")!;
        expect(edge.getAttribute("data-color")).toBe(models.palette[ot]);
      }
    }
    const legendTypes = [...root.querySelectorAll("#color-legend .swatch")].map((s) => s.getAttribute("data-ot"));
    expect(legendTypes.sort()).toEqual(Object.keys(models.palette).sort());

    // frequency slider beyond the maximum empties the right pane
    const maxNodeFreq = Math.max(...models.whole.nodes.map((n) => n.frequency));
    await store.setThresholds(maxNodeFreq + 1, 0);
    expect(store.state.models!.cell!.nodes).toEqual([]);
    const placeholder = root.querySelector("#cell-pane .empty-model");
    expect(placeholder).not.toBeNull();
    expect(root.querySelector("#cell-pane svg")).toBeNull();

    // back to a full model: sliders at zero restore both panes
    await store.setThresholds(0, 0);
    expect(root.querySelector("#cell-pane svg")).not.toBeNull();

    // undo restores the timestamp dimension chip
    await store.apply({ op: "undo" });
    expect(store.state.view?.selected).toEqual(["activity", "order", "timestamp"]);
    expect(root.querySelector('#dimension-chips [data-dimension="timestamp"]')).not.toBeNull();
  }, 60_000);

  it("activity filter removes a type's edges from both panes", async () => {
    const store = new ExplorerStore(new CubeClient(BASE));
    const root = document.createElement("div");
    document.body.append(root);
    store.subscribe((state) => render(root, state, store));

    await store.loadLog(new Blob([logBytes]), "p2p.ocel.json", "ocel");
    await store.buildCube(["activity", "order"]);
    const session = store.state.session!;
    // uncheck every activity for the order type
    for (const activity of session.activities) {
      await store.toggleActivity("order", activity, false);
    }
    const types = new Set(store.state.models!.whole.edges.map((e) => e.object_type));
    expect(types.has("order")).toBe(false);
    const domTypes = new Set(
      [...root.querySelectorAll("#whole-pane g.edge")].map((g) => g.getAttribute("data-ot")),
    );
    expect(domTypes.has("order")).toBe(false);
  }, 60_000);
});
