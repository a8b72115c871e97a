// Thin typed client for the /v1 service.

import type { FieldError, ModelPayload, ScenarioReport, ScenarioSpec } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public errors: FieldError[]
  ) {
    super(errors.map((e) => `${e.field}: ${e.message}`).join("; ") || `HTTP ${status}`);
  }
}

export class ApiClient {
  constructor(private baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl.replace(/\/$/, "")}/v1${path}`;
  }

  private async parseError(resp: Response): Promise<never> {
    let errors: FieldError[] = [];
    try {
      const body = await resp.json();
      if (Array.isArray(body.errors)) errors = body.errors;
      else if (body.error) errors = [{ field: "", message: String(body.error) }];
    } catch {
      // non-JSON error body; status alone will have to do
    }
    throw new ApiError(resp.status, errors);
  }

  async health(): Promise<boolean> {
    const resp = await fetch(this.url("/health"));
    return resp.ok;
  }

  async model(): Promise<ModelPayload> {
    const resp = await fetch(this.url("/model"));
    if (!resp.ok) return this.parseError(resp);
    return resp.json();
  }

  async scenario(spec: ScenarioSpec): Promise<ScenarioReport> {
    const resp = await fetch(this.url("/scenario"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(spec),
    });
    if (!resp.ok) return this.parseError(resp);
    return resp.json();
  }

  async bands(variable: string, cuts: number[]): Promise<unknown> {
    const params = new URLSearchParams({ variable, cuts: cuts.join(",") });
    const resp = await fetch(this.url(`/bands?${params}`));
    if (!resp.ok) return this.parseError(resp);
    return resp.json();
  }

  async clusters(minSupport: number, maxSize: number): Promise<ClustersPayload> {
    const params = new URLSearchParams({
      min_support: String(minSupport),
      max_size: String(maxSize),
    });
    const resp = await fetch(this.url(`/clusters?${params}`));
    if (!resp.ok) return this.parseError(resp);
    return resp.json();
  }
}

export interface ClusterCombo {
  rule_ids: string[];
  support: number;
  predicted_rate: number;
  observed_rate: number;
  gap: number;
}

export interface ClusterQualityRow extends ClusterCombo {
  suggestion: string | null;
}

export interface ClustersPayload {
  min_support: number;
  max_size: number;
  combos: ClusterCombo[];
  quality: ClusterQualityRow[];
}
