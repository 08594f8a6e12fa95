/**
 * Explorer state machine. All cube truth comes from server responses;
 * the store only remembers which session/cell/filters are active and the
 * latest summaries it was given. Model requests are latest-wins: a stale
 * response never overwrites a newer one.
 */

import {
  CellsPage,
  CubeClient,
  ModelResponse,
  Operation,
  SessionSummary,
  ServiceError,
  StructureSummary,
  ViewSummary,
} from "./api.js";

export interface ExplorerState {
  session: SessionSummary | null;
  structure: StructureSummary | null;
  view: ViewSummary | null;
  cells: CellsPage | null;
  cellsPage: number;
  selectedCell: Record<string, string> | null;
  /** activity-filter matrix: object type -> checked activities */
  filter: Record<string, string[]>;
  minNodeFreq: number;
  minEdgeFreq: number;
  mode: "frequency" | "performance";
  models: ModelResponse | null;
  busy: boolean;
  error: string | null;
}

export function initialState(): ExplorerState {
  return {
    session: null,
    structure: null,
    view: null,
    cells: null,
    cellsPage: 1,
    selectedCell: null,
    filter: {},
    minNodeFreq: 0,
    minEdgeFreq: 0,
    mode: "frequency",
    models: null,
    busy: false,
    error: null,
  };
}

type Listener = (state: ExplorerState) => void;

export class ExplorerStore {
  state: ExplorerState = initialState();
  private listeners: Listener[] = [];
  private modelRequest = 0;

  constructor(readonly client: CubeClient) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(patch: Partial<ExplorerState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  /** Full activity matrix (everything checked) for the loaded log. */
  private fullFilter(session: SessionSummary): Record<string, string[]> {
    const filter: Record<string, string[]> = {};
    for (const ot of session.object_types) filter[ot] = [...session.activities];
    return filter;
  }

  private isFullFilter(): boolean {
    const session = this.state.session;
    if (!session) return true;
    return session.object_types.every((ot) => {
      const checked = this.state.filter[ot] ?? [];
      return checked.length === session.activities.length;
    });
  }

  private async guard<T>(work: () => Promise<T>): Promise<T | null> {
    this.emit({ busy: true, error: null });
    try {
      const result = await work();
      this.emit({ busy: false });
      return result;
    } catch (error) {
      const message = error instanceof ServiceError ? error.message : String(error);
      this.emit({ busy: false, error: message });
      return null;
    }
  }

  async loadLog(file: Blob, filename: string, format: string, mapping?: object): Promise<void> {
    await this.guard(async () => {
      const session = await this.client.createSession(file, filename, format, mapping);
      this.emit({
        ...initialState(),
        session,
        filter: this.fullFilter(session),
        busy: true,
      });
      return session;
    });
  }

  async buildCube(dimensions: string[], granularity?: object): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    await this.guard(async () => {
      const structure = await this.client.buildCube(session.session, dimensions, granularity);
      this.emit({ structure, view: structure.view, selectedCell: null, models: null, cellsPage: 1 });
      await this.refreshCells();
      await this.refreshModels();
      return structure;
    });
  }

  async apply(operation: Operation): Promise<void> {
    const session = this.state.session;
    if (!session) return;
    await this.guard(async () => {
      const view = await this.client.applyOperation(session.session, operation);
      this.emit({ view, selectedCell: null, cellsPage: 1 });
      await this.refreshCells();
      await this.refreshModels();
      return view;
    });
  }

  async refreshCells(page?: number): Promise<void> {
    const session = this.state.session;
    if (!session || !this.state.structure) return;
    const requested = page ?? this.state.cellsPage;
    const cells = await this.client.cells(session.session, requested);
    this.emit({ cells, cellsPage: requested });
  }

  async selectCell(coords: Record<string, string> | null): Promise<void> {
    this.emit({ selectedCell: coords });
    await this.refreshModels();
  }

  setThresholds(minNodeFreq: number, minEdgeFreq: number): Promise<void> {
    this.emit({ minNodeFreq, minEdgeFreq });
    return this.refreshModels();
  }

  setMode(mode: "frequency" | "performance"): Promise<void> {
    this.emit({ mode });
    return this.refreshModels();
  }

  toggleActivity(objectType: string, activity: string, checked: boolean): Promise<void> {
    const current = new Set(this.state.filter[objectType] ?? []);
    if (checked) current.add(activity);
    else current.delete(activity);
    this.emit({ filter: { ...this.state.filter, [objectType]: [...current].sort() } });
    return this.refreshModels();
  }

  async refreshModels(): Promise<void> {
    const session = this.state.session;
    if (!session || !this.state.structure) return;
    const token = ++this.modelRequest;
    try {
      const models = await this.client.model(session.session, {
        scope: this.state.selectedCell ? "cell" : "whole",
        cell: this.state.selectedCell ?? undefined,
        filter: this.isFullFilter() ? undefined : this.state.filter,
        minNodeFreq: this.state.minNodeFreq,
        minEdgeFreq: this.state.minEdgeFreq,
        mode: this.state.mode,
      });
      if (token === this.modelRequest) this.emit({ models, error: null });
    } catch (error) {
      if (token === this.modelRequest) {
        const message = error instanceof ServiceError ? error.message : String(error);
        this.emit({ error: message });
      }
    }
  }

  exportUrl(what: string): string {
    const session = this.state.session;
    if (!session) return "#";
    const params: Record<string, string> = { what, mode: this.state.mode };
    if (this.state.selectedCell) {
      params.scope = "cell";
      params.cell = JSON.stringify(this.state.selectedCell);
    }
    return this.client.exportUrl(session.session, params);
  }
}
