/**
 * Parser and layout for the server's DOT profile (docs/formats/dot.md).
 *
 * The profile is deliberately narrow — quoted identifiers, one node or
 * edge per line, a flat attribute list — so a full DOT grammar is not
 * needed. Layout is layered left-to-right: longest-path layering from the
 * source nodes, names ordered within a layer, edges drawn as curves.
 */

export interface DotNode {
  name: string;
  label: string;
  freq: number;
}

export interface DotEdge {
  source: string;
  target: string;
  color: string;
  label: string;
  objectType: string;
  freq: number;
  median: number;
}

export interface DotGraph {
  nodes: DotNode[];
  edges: DotEdge[];
}

function readQuoted(line: string, from: number): { value: string; end: number } {
  if (line[from] !== '"') throw new Error(`expected quote at ${from}: ${line}`);
  let value = "";
  let i = from + 1;
  while (i < line.length) {
    const ch = line[i];
    if (ch === "\\") {
      value += line[i + 1];
      i += 2;
      continue;
    }
    if (ch === '"') return { value, end: i + 1 };
    value += ch;
    i += 1;
  }
  throw new Error(`unterminated quote: ${line}`);
}

function readAttributes(segment: string): Record<string, string> {
  const out: Record<string, string> = {};
  let i = 0;
  while (i < segment.length) {
    while (i < segment.length && (segment[i] === " " || segment[i] === ",")) i += 1;
    if (i >= segment.length) break;
    let key = "";
    while (i < segment.length && segment[i] !== "=") {
      key += segment[i];
      i += 1;
    }
    i += 1; // '='
    if (segment[i] === '"') {
      const { value, end } = readQuoted(segment, i);
      out[key.trim()] = value;
      i = end;
    } else {
      let value = "";
      while (i < segment.length && segment[i] !== " " && segment[i] !== ",") {
        value += segment[i];
        i += 1;
      }
      out[key.trim()] = value;
    }
  }
  return out;
}

export function parseDot(text: string): DotGraph {
  const nodes: DotNode[] = [];
  const edges: DotEdge[] = [];
  for (const raw of text.split("\n")) {
    const line = raw.trim().replace(/;$/, "");
    if (!line.startsWith('"')) continue; // header, footer, defaults
    const first = readQuoted(line, 0);
    const rest = line.slice(first.end).trim();
    const open = line.indexOf("[", first.end);
    const close = line.lastIndexOf("]");
    const attrs = open >= 0 && close > open ? readAttributes(line.slice(open + 1, close)) : {};
    if (rest.startsWith("->")) {
      const targetStart = line.indexOf('"', first.end + line.slice(first.end).indexOf("->"));
      const target = readQuoted(line, targetStart);
      edges.push({
        source: first.value,
        target: target.value,
        color: attrs["color"] ?? "#000000",
        label: attrs["label"] ?? "",
        objectType: attrs["ot"] ?? "",
        freq: Number(attrs["freq"] ?? 0),
        median: Number(attrs["median"] ?? 0),
      });
    } else {
      nodes.push({
        name: first.value,
        label: (attrs["label"] ?? first.value).replace(/\\n/g, "\n"),
        freq: Number(attrs["freq"] ?? 0),
      });
    }
  }
  return { nodes, edges };
}

/** Longest-path layer per node; cycle back-edges do not extend a path. */
export function layerAssignment(graph: DotGraph): Map<string, number> {
  const out = new Map<string, number>();
  const incoming = new Map<string, string[]>();
  for (const n of graph.nodes) incoming.set(n.name, []);
  for (const e of graph.edges) {
    if (e.source !== e.target && incoming.has(e.target)) incoming.get(e.target)!.push(e.source);
  }
  const visiting = new Set<string>();
  const depth = (name: string): number => {
    const known = out.get(name);
    if (known !== undefined) return known;
    if (visiting.has(name)) return 0;
    visiting.add(name);
    let best = 0;
    for (const pred of incoming.get(name) ?? []) {
      best = Math.max(best, depth(pred) + 1);
    }
    visiting.delete(name);
    out.set(name, best);
    return best;
  };
  for (const n of graph.nodes) depth(n.name);
  return out;
}

const NODE_W = 190;
const NODE_H = 48;
const GAP_X = 90;
const GAP_Y = 28;

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Render the graph as standalone SVG markup with machine-readable data attributes. */
export function renderSvg(graph: DotGraph): string {
  const layers = layerAssignment(graph);
  const byLayer = new Map<number, DotNode[]>();
  for (const n of [...graph.nodes].sort((a, b) => a.name.localeCompare(b.name))) {
    const l = layers.get(n.name) ?? 0;
    if (!byLayer.has(l)) byLayer.set(l, []);
    byLayer.get(l)!.push(n);
  }
  const pos = new Map<string, { x: number; y: number }>();
  let maxRows = 1;
  for (const [layer, members] of byLayer) {
    maxRows = Math.max(maxRows, members.length);
    members.forEach((n, row) => {
      pos.set(n.name, { x: 20 + layer * (NODE_W + GAP_X), y: 20 + row * (NODE_H + GAP_Y) });
    });
  }
  const width = 40 + (Math.max(0, ...byLayer.keys()) + 1) * (NODE_W + GAP_X);
  const height = 40 + maxRows * (NODE_H + GAP_Y);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" class="mvp-graph" ` +
      `data-nodes="${graph.nodes.length}" data-edges="${graph.edges.length}">`,
  );
  for (const e of graph.edges) {
    const a = pos.get(e.source);
    const b = pos.get(e.target);
    if (!a || !b) continue;
    const x1 = a.x + NODE_W;
    const y1 = a.y + NODE_H / 2;
    const x2 = b.x;
    const y2 = b.y + NODE_H / 2;
    const bend = e.source === e.target ? 40 : Math.max(30, (x2 - x1) / 2);
    const path =
      e.source === e.target
        ? `M ${x1} ${y1 - 8} C ${x1 + 50} ${y1 - 40}, ${x1 + 50} ${y1 + 40}, ${x1} ${y1 + 8}`
        : `M ${x1} ${y1} C ${x1 + bend} ${y1}, ${x2 - bend} ${y2}, ${x2} ${y2}`;
    parts.push(
      `<g class="edge" data-source="${escapeXml(e.source)}" data-target="${escapeXml(e.target)}" ` +
        `data-ot="${escapeXml(e.objectType)}" data-freq="${e.freq}" data-color="${e.color}">` +
        `<path d="${path}" fill="none" stroke="${e.color}" stroke-width="2" marker-end="url(#arrow)"/>` +
        `<text x="${(x1 + x2) / 2}" y="${(y1 + y2) / 2 - 6}" fill="${e.color}" font-size="11" text-anchor="middle">` +
        `${escapeXml(e.label)}</text></g>`,
    );
  }
  for (const n of graph.nodes) {
    const p = pos.get(n.name)!;
    const lines = n.label.split("\n");
    parts.push(
      `<g class="node" data-activity="${escapeXml(n.name)}" data-freq="${n.freq}">` +
        `<rect x="${p.x}" y="${p.y}" width="${NODE_W}" height="${NODE_H}" rx="6" fill="#f8f9fb" stroke="#444"/>` +
        lines
          .map(
            (text, i) =>
              `<text x="${p.x + NODE_W / 2}" y="${p.y + 20 + i * 16}" font-size="12" text-anchor="middle">` +
              `${escapeXml(text)}</text>`,
          )
          .join("") +
        `</g>`,
    );
  }
  parts.push(
    `<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7" markerHeight="7" ` +
      `orient="auto-start-reverse"><path d="M 0 0 L 10 5 L 0 10 z" fill="context-stroke"/></marker></defs>`,
  );
  parts.push("</svg>");
  return parts.join("");
}
