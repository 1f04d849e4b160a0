/** Typed client for the /v1 API. The workbench renders response fields
 * verbatim; nothing in here recomputes or reformats a metric. */

export interface Finding {
  code: string;
  message: string;
  severity: string;
  field: string;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  findings: Finding[];
}

export class ApiFailure extends Error {
  constructor(
    readonly status: number,
    readonly body: ApiErrorBody,
  ) {
    super(body.message);
  }
}

export interface SubThreatDoc {
  id: string;
  name: string;
  temporal_pattern: string;
  impact_profile: string;
  lifecycle_phases: string[];
  keywords: string[];
}

export interface DomainDoc {
  id: string;
  name: string;
  description: string;
  loss_categories: string[];
  prevalence_note: string;
  sub_threats: SubThreatDoc[];
}

export interface AnchorDoc {
  framework: string;
  reference: string;
  note?: string;
}

export interface TaxonomyResponse {
  taxonomy_version: string;
  domains: DomainDoc[];
  crosswalk: Record<string, AnchorDoc[]>;
}

export interface ModelDoc {
  type: string;
  [param: string]: unknown;
}

export interface ControlDoc {
  id: string;
  name: string;
  frequency_reduction: number;
  magnitude_reduction: number;
  annual_cost: number;
  applicable_domains: string[];
}

export interface ScenarioDoc {
  id: string;
  title: string;
  sub_threat_id: string;
  narrative: string;
  exposure_note: string;
  frequency: ModelDoc;
  severities: Record<string, ModelDoc>;
  controls: ControlDoc[];
  currency_code: string;
}

export interface PortfolioDoc {
  schema_version: string;
  id: string;
  taxonomy_version: string;
  eu_high_risk: boolean;
  scenarios: ScenarioDoc[];
}

export interface MetricsDoc {
  eal: number;
  var: Record<string, number>;
  tvar: Record<string, number>;
  zero_loss_probability: number;
  per_category_eal: Record<string, number>;
  exceedance_curve?: [number, number][];
}

export interface SimulateResponse {
  portfolio_id: string;
  seed: number;
  n_trials: number;
  taxonomy_version: string;
  confidences: number[];
  reserve: { confidence: number; amount: number };
  portfolio: MetricsDoc;
  scenarios: Record<string, MetricsDoc>;
}

export interface WhatIfResponse {
  portfolio_id: string;
  scenario_id: string;
  seed: number;
  n_trials: number;
  taxonomy_version: string;
  enabled_controls: string[];
  baseline: MetricsDoc;
  treated: MetricsDoc;
  delta: { eal: number; var: Record<string, number> };
  annual_cost: number;
  net_benefit: number;
  rosi: number | null;
}

export interface CalibrateResponse {
  lower: number;
  upper: number;
  confidence: number;
  mu: number;
  sigma: number;
}

export interface PortfolioEnvelope {
  revision: number;
  portfolio: PortfolioDoc;
}

async function parseOrThrow<T>(response: Response): Promise<T> {
  if (response.ok) {
    return (await response.json()) as T;
  }
  let body: ApiErrorBody;
  try {
    body = (await response.json()) as ApiErrorBody;
  } catch {
    body = { code: "unknown", message: response.statusText, findings: [] };
  }
  throw new ApiFailure(response.status, body);
}

export class ApiClient {
  constructor(readonly baseUrl: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown, headers?: Record<string, string>): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: { "Content-Type": "application/json", ...(headers ?? {}) },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    return parseOrThrow<T>(response);
  }

  getTaxonomy(): Promise<TaxonomyResponse> {
    return this.request("GET", "/v1/taxonomy");
  }

  getPortfolio(id: string): Promise<PortfolioEnvelope> {
    return this.request("GET", `/v1/portfolios/${encodeURIComponent(id)}`);
  }

  createPortfolio(doc: PortfolioDoc, requestId?: string): Promise<{ id: string; revision: number }> {
    const headers = requestId ? { "X-Request-Id": requestId } : undefined;
    return this.request("POST", "/v1/portfolios", doc, headers);
  }

  putPortfolio(doc: PortfolioDoc, revision: number): Promise<{ id: string; revision: number }> {
    return this.request("PUT", `/v1/portfolios/${encodeURIComponent(doc.id)}`, doc, {
      "If-Match": String(revision),
    });
  }

  calibrateLognormal(lower: number, upper: number, confidence: number): Promise<CalibrateResponse> {
    return this.request("POST", "/v1/calibrate/lognormal", { lower, upper, confidence });
  }

  simulate(portfolioId: string, trials: number, seed: number, confidences: number[]): Promise<SimulateResponse> {
    return this.request("POST", `/v1/portfolios/${encodeURIComponent(portfolioId)}/simulate`, {
      trials,
      seed,
      confidences,
    });
  }

  whatIf(
    portfolioId: string,
    scenarioId: string,
    trials: number,
    seed: number,
    confidences: number[],
    toggles: { id: string; enabled: boolean }[],
  ): Promise<WhatIfResponse> {
    return this.request("POST", `/v1/portfolios/${encodeURIComponent(portfolioId)}/whatif`, {
      scenario_id: scenarioId,
      trials,
      seed,
      confidences,
      controls: toggles,
    });
  }
}
