/**
 * Typed client for the dddkit model service.
 *
 * Every mutation carries the revision the client last saw; the server
 * rejects stale revisions with 409, which surfaces here as ConflictError
 * so the UI can prompt for a reload instead of silently clobbering a
 * concurrent edit.
 */

export interface FieldJson {
  name: string;
  type: string;
}

export interface MethodJson {
  name: string;
  params: FieldJson[];
  returnType: string | null;
  visibility: string;
  mutates: boolean;
}

export interface EntityJson {
  name: string;
  isRoot: boolean;
  idType: string;
  fields: FieldJson[];
  methods: MethodJson[];
}

export interface ValueObjectJson {
  name: string;
  fields: FieldJson[];
  methods: MethodJson[];
  isIdentifierOf: string | null;
}

export interface EventJson {
  name: string;
  fields: FieldJson[];
}

export interface AggregateJson {
  name: string;
  entities: EntityJson[];
  valueObjects: ValueObjectJson[];
  events: EventJson[];
}

export interface RepositoryJson {
  name: string;
  forAggregate: string;
}

export interface ServiceJson {
  name: string;
  methods: MethodJson[];
}

export interface ModelJson {
  name: string;
  aggregates: AggregateJson[];
  valueObjects: ValueObjectJson[];
  repositories: RepositoryJson[];
  services: ServiceJson[];
}

export interface RepairJson {
  id: string;
  title: string;
}

export interface DiagnosticJson {
  ruleId: string;
  severity: "error" | "warning" | "info";
  subject: string;
  message: string;
  repairs: RepairJson[];
}

export interface RuleJson {
  id: string;
  severity: string;
  overridable: boolean;
  description: string;
}

export interface ModelSnapshot {
  revision: number;
  text: string;
  model: ModelJson;
}

export interface MutationResult extends ModelSnapshot {
  diagnostics: DiagnosticJson[];
}

/** Raised when the server reports our revision is stale (HTTP 409). */
export class ConflictError extends Error {
  constructor(public readonly currentRevision: number) {
    super(`stale revision; server is at ${currentRevision}`);
    this.name = "ConflictError";
  }
}

/** Raised for any other non-2xx response. */
export class ApiError extends Error {
  constructor(public readonly status: number, detail: unknown) {
    super(`request failed with ${status}: ${JSON.stringify(detail)}`);
    this.name = "ApiError";
  }
}

export type FetchLike = (
  url: string,
  init?: {
    method?: string;
    headers?: Record<string, string>;
    body?: string;
  }
) => Promise<{ status: number; json(): Promise<any> }>;

export class StudioClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch as unknown as FetchLike
  ) {}

  private async request(path: string, init?: Parameters<FetchLike>[1]): Promise<any> {
    const res = await this.fetchImpl(this.baseUrl + path, init);
    const body = await res.json();
    if (res.status === 409) {
      const current = body?.detail?.currentRevision ?? -1;
      throw new ConflictError(current);
    }
    if (res.status < 200 || res.status >= 300) {
      throw new ApiError(res.status, body?.detail ?? body);
    }
    return body;
  }

  getModel(): Promise<ModelSnapshot> {
    return this.request("/api/model");
  }

  async getDiagnostics(): Promise<{ revision: number; diagnostics: DiagnosticJson[] }> {
    return this.request("/api/diagnostics");
  }

  async getRules(): Promise<RuleJson[]> {
    const body = await this.request("/api/rules");
    return body.rules;
  }

  putModel(text: string, revision: number): Promise<MutationResult> {
    return this.request("/api/model", {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ text, revision }),
    });
  }

  applyRepair(
    subject: string,
    ruleId: string,
    repairId: string,
    revision: number
  ): Promise<MutationResult> {
    return this.request("/api/repairs", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ subject, ruleId, repairId, revision }),
    });
  }

  previewDelta(text: string): Promise<{ revision: number; delta: unknown }> {
    return this.request("/api/preview-delta", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ text }),
    });
  }
}
