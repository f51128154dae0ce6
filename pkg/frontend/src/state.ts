/** UI state and actions. Views render from this store; actions own all fetches. */

import {
  ApiClient,
  ApiError,
  DependenciesResponse,
  GroupRecord,
  SearchResponse,
} from "./api.js";

export type View =
  | { kind: "search" }
  | { kind: "group"; id: number }
  | { kind: "not-found"; id: number };

export interface UiState {
  query: string;
  selectedPackages: string[];
  availablePackages: string[];
  limit: number;
  loading: boolean;
  error: string | null;
  validation: string | null;
  response: SearchResponse | null;
  view: View;
  group: GroupRecord | null;
  deps: DependenciesResponse | null;
}

export const DEFAULT_LIMIT = 50;

function initialState(): UiState {
  return {
    query: "",
    selectedPackages: [],
    availablePackages: [],
    limit: DEFAULT_LIMIT,
    loading: false,
    error: null,
    validation: null,
    response: null,
    view: { kind: "search" },
    group: null,
    deps: null,
  };
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) {
    return `${err.code}: ${err.message}`;
  }
  return err instanceof Error ? err.message : String(err);
}

export class AppStore {
  readonly state: UiState = initialState();

  private listeners: Array<() => void> = [];
  private searchSeq = 0;
  private searchAbort: AbortController | null = null;
  private groupSeq = 0;

  constructor(private readonly api: ApiClient) {}

  subscribe(listener: () => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener();
    }
  }

  setSelectedPackages(packages: string[]): void {
    this.state.selectedPackages = packages;
  }

  setLimit(limit: number): void {
    this.state.limit = limit;
  }

  async loadPackages(): Promise<void> {
    try {
      const res = await this.api.getPackages();
      this.state.availablePackages = res.packages;
      this.emit();
    } catch {
      // the package filter is a nicety; search works without it
    }
  }

  /** Submit a query. Blank input shows a validation message and sends nothing. */
  async submitSearch(rawQuery: string): Promise<void> {
    const query = rawQuery.trim();
    if (!query) {
      this.state.validation = "Enter a query first.";
      this.emit();
      return;
    }
    this.searchAbort?.abort();
    const abort = new AbortController();
    this.searchAbort = abort;
    const seq = ++this.searchSeq;
    this.state.query = query;
    this.state.validation = null;
    this.state.loading = true;
    this.state.error = null;
    this.emit();
    try {
      const response = await this.api.search(query, {
        packages: this.state.selectedPackages,
        limit: this.state.limit,
        signal: abort.signal,
      });
      if (seq !== this.searchSeq) {
        return; // a newer search finished or started; drop this response
      }
      this.state.response = response;
      this.state.loading = false;
      this.emit();
    } catch (err) {
      if (seq !== this.searchSeq) {
        return;
      }
      if (err instanceof DOMException && err.name === "AbortError") {
        return;
      }
      this.state.loading = false;
      this.state.error = describeError(err);
      this.emit();
    }
  }

  /** Load one group plus its dependency panel (one fetch each). */
  async openGroup(id: number): Promise<void> {
    const seq = ++this.groupSeq;
    this.state.view = { kind: "group", id };
    this.state.group = null;
    this.state.deps = null;
    this.state.loading = true;
    this.state.error = null;
    this.emit();
    try {
      const [group, deps] = await Promise.all([
        this.api.getGroup(id),
        this.api.getDependencies(id),
      ]);
      if (seq !== this.groupSeq) {
        return;
      }
      this.state.group = group;
      this.state.deps = deps;
      this.state.loading = false;
      this.emit();
    } catch (err) {
      if (seq !== this.groupSeq) {
        return;
      }
      this.state.loading = false;
      if (err instanceof ApiError && err.status === 404) {
        this.state.view = { kind: "not-found", id };
      } else {
        this.state.error = describeError(err);
      }
      this.emit();
    }
  }

  showSearch(): void {
    this.groupSeq += 1; // invalidate any in-flight group load
    this.state.view = { kind: "search" };
    this.state.loading = false;
    this.state.error = null;
    this.emit();
  }
}
