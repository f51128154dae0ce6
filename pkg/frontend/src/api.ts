/** Typed client for the declsearch HTTP API. All routes are GET. */

export interface ResultScores {
  semantic: number;
  lexical: number;
  pagerank: number;
  total: number;
}

export interface SearchResult {
  id: number;
  primary_decl_name: string;
  package: string;
  source_file: string;
  statement_text: string;
  docstring: string | null;
  informal_description: string | null;
  scores: ResultScores;
}

export interface SearchResponse {
  query: string;
  count: number;
  results: SearchResult[];
}

export interface GroupMember {
  lean_name: string;
  kind: string;
  docstring: string | null;
  start_line: number;
  end_line: number;
}

export interface GroupRecord {
  id: number;
  primary_decl_name: string;
  package: string;
  source_file: string;
  span: { start_line: number; end_line: number };
  statement_text: string;
  docstring: string | null;
  informal_description: string | null;
  members: GroupMember[];
  dependency_ids: number[];
}

export interface GroupLink {
  id: number;
  primary_decl_name: string;
}

export interface DependenciesResponse {
  id: number;
  dependencies: GroupLink[];
  dependents: GroupLink[];
}

export interface PackagesResponse {
  packages: string[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export interface SearchParams {
  packages?: string[];
  limit?: number;
  signal?: AbortSignal;
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  private async get<T>(path: string, signal?: AbortSignal): Promise<T> {
    const res = await fetch(this.baseUrl + path, { signal });
    if (!res.ok) {
      let code = "http_error";
      let detail = `request failed with status ${res.status}`;
      try {
        const body = await res.json();
        if (body && typeof body.error === "string") {
          code = body.error;
          detail = typeof body.detail === "string" ? body.detail : detail;
        }
      } catch {
        // non-JSON error body; keep the generic detail
      }
      throw new ApiError(res.status, code, detail);
    }
    return res.json() as Promise<T>;
  }

  search(query: string, params: SearchParams = {}): Promise<SearchResponse> {
    const qs = new URLSearchParams({ q: query });
    if (params.packages && params.packages.length > 0) {
      qs.set("packages", params.packages.join(","));
    }
    if (params.limit !== undefined) {
      qs.set("limit", String(params.limit));
    }
    return this.get<SearchResponse>(`/api/v1/search?${qs}`, params.signal);
  }

  getGroup(id: number, signal?: AbortSignal): Promise<GroupRecord> {
    return this.get<GroupRecord>(`/api/v1/groups/${id}`, signal);
  }

  getDependencies(id: number, signal?: AbortSignal): Promise<DependenciesResponse> {
    return this.get<DependenciesResponse>(`/api/v1/groups/${id}/dependencies`, signal);
  }

  getPackages(signal?: AbortSignal): Promise<PackagesResponse> {
    return this.get<PackagesResponse>("/api/v1/packages", signal);
  }
}
