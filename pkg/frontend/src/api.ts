/**
 * Typed client for the occube session API. Every cube mutation and model
 * request goes through here; the UI never derives cube truth locally.
 */

export interface SessionSummary {
  session: string;
  events: number;
  attributes: string[];
  object_types: string[];
  activities: string[];
}

export interface DimensionSummary {
  name: string;
  kind: "attribute" | "object-type";
  n_values: number;
  levels: Record<string, number>;
  default_level: string;
}

export interface ViewSummary {
  selected: string[];
  sel_sizes: Record<string, number>;
  history_length: number;
}

export interface StructureSummary {
  session: string;
  dimensions: DimensionSummary[];
  view: ViewSummary;
}

export interface CellEntry {
  coords: Record<string, string>;
  events: number;
}

export interface CellsPage {
  session: string;
  page: number;
  page_size: number;
  total_cells: number;
  cell_space: number;
  cells: CellEntry[];
}

export interface ModelNode {
  activity: string;
  frequency: number;
}

export interface ModelEdge {
  source: string;
  target: string;
  object_type: string;
  frequency: number;
  performance: { mean: number; median: number; min: number; max: number };
}

export interface ModelDoc {
  nodes: ModelNode[];
  edges: ModelEdge[];
  dot: string;
}

export interface ModelResponse {
  session: string;
  scope: "whole" | "cell";
  mode: "frequency" | "performance";
  palette: Record<string, string>;
  whole: ModelDoc;
  cell: ModelDoc | null;
}

export interface ApiError {
  code: string;
  detail: string;
}

export class ServiceError extends Error {
  code: string;
  status: number;

  constructor(status: number, body: ApiError) {
    super(`${body.code}: ${body.detail}`);
    this.code = body.code;
    this.status = status;
  }
}

export type Operation =
  | { op: "slice"; dimension: string; member: string }
  | { op: "dice"; filter: Record<string, string[]> }
  | { op: "change-granularity"; dimension: string; level: string }
  | { op: "undo" };

export interface ModelParams {
  scope: "whole" | "cell";
  cell?: Record<string, string>;
  filter?: Record<string, string[]>;
  minNodeFreq: number;
  minEdgeFreq: number;
  mode: "frequency" | "performance";
}

async function parse<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let body: ApiError;
    try {
      body = (await response.json()) as ApiError;
    } catch {
      body = { code: `http-${response.status}`, detail: response.statusText };
    }
    throw new ServiceError(response.status, body);
  }
  return (await response.json()) as T;
}

export class CubeClient {
  constructor(private readonly base: string = "") {}

  async createSession(file: Blob, filename: string, format: string, mapping?: object): Promise<SessionSummary> {
    const form = new FormData();
    form.append("file", file, filename);
    form.append("format", format);
    if (mapping) form.append("mapping", JSON.stringify(mapping));
    return parse(await fetch(`${this.base}/sessions`, { method: "POST", body: form }));
  }

  async buildCube(session: string, dimensions: string[], granularity?: object): Promise<StructureSummary> {
    return parse(
      await fetch(`${this.base}/sessions/${session}/cube`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ dimensions, granularity }),
      }),
    );
  }

  async applyOperation(session: string, operation: Operation): Promise<ViewSummary> {
    return parse(
      await fetch(`${this.base}/sessions/${session}/ops`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(operation),
      }),
    );
  }

  async cells(session: string, page = 1, pageSize = 200): Promise<CellsPage> {
    const query = new URLSearchParams({ page: String(page), page_size: String(pageSize) });
    return parse(await fetch(`${this.base}/sessions/${session}/cells?${query}`));
  }

  async model(session: string, params: ModelParams): Promise<ModelResponse> {
    const query = new URLSearchParams({
      scope: params.scope,
      min_node_freq: String(params.minNodeFreq),
      min_edge_freq: String(params.minEdgeFreq),
      mode: params.mode,
    });
    if (params.cell) query.set("cell", JSON.stringify(params.cell));
    if (params.filter) query.set("filter", JSON.stringify(params.filter));
    return parse(await fetch(`${this.base}/sessions/${session}/model?${query}`));
  }

  exportUrl(session: string, params: Record<string, string>): string {
    const query = new URLSearchParams(params);
    return `${this.base}/sessions/${session}/export?${query}`;
  }
}
