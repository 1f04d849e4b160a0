/** Single view state and its pure transition functions. All rendered metrics
 * live inside the stored API responses; transitions only select, toggle, or
 * replace whole responses. */

import type {
  CalibrateResponse,
  Finding,
  PortfolioDoc,
  SimulateResponse,
  TaxonomyResponse,
  WhatIfResponse,
} from "./api.js";

export type Tab = "taxonomy" | "scenarios" | "simulation" | "whatif";

export interface ViewState {
  tab: Tab;
  taxonomy: TaxonomyResponse | null;
  selectedDomainId: string | null;
  portfolio: PortfolioDoc | null;
  revision: number | null;
  selectedScenarioId: string | null;
  /** control id -> enabled, for the selected scenario's attached controls */
  toggles: Record<string, boolean>;
  calibration: CalibrateResponse | null;
  lastSimulation: SimulateResponse | null;
  lastWhatIf: WhatIfResponse | null;
  dirty: boolean;
  inFlight: number;
  queued: number;
  inlineFindings: Finding[];
  error: string | null;
}

export function initialState(): ViewState {
  return {
    tab: "taxonomy",
    taxonomy: null,
    selectedDomainId: null,
    portfolio: null,
    revision: null,
    selectedScenarioId: null,
    toggles: {},
    calibration: null,
    lastSimulation: null,
    lastWhatIf: null,
    dirty: false,
    inFlight: 0,
    queued: 0,
    inlineFindings: [],
    error: null,
  };
}

export function setTab(state: ViewState, tab: Tab): ViewState {
  return { ...state, tab };
}

export function setTaxonomy(state: ViewState, taxonomy: TaxonomyResponse): ViewState {
  const first = taxonomy.domains[0];
  return {
    ...state,
    taxonomy,
    selectedDomainId: state.selectedDomainId ?? (first ? first.id : null),
  };
}

export function selectDomain(state: ViewState, domainId: string): ViewState {
  return { ...state, selectedDomainId: domainId };
}

function defaultToggles(portfolio: PortfolioDoc | null, scenarioId: string | null): Record<string, boolean> {
  if (!portfolio || !scenarioId) {
    return {};
  }
  const scenario = portfolio.scenarios.find((s) => s.id === scenarioId);
  const toggles: Record<string, boolean> = {};
  for (const control of scenario?.controls ?? []) {
    toggles[control.id] = false;
  }
  return toggles;
}

export function setPortfolio(state: ViewState, portfolio: PortfolioDoc, revision: number): ViewState {
  const firstScenario = portfolio.scenarios[0];
  const selected = firstScenario ? firstScenario.id : null;
  return {
    ...state,
    portfolio,
    revision,
    selectedScenarioId: selected,
    toggles: defaultToggles(portfolio, selected),
    calibration: null,
    lastSimulation: null,
    lastWhatIf: null,
    dirty: false,
    inlineFindings: [],
    error: null,
  };
}

export function selectScenario(state: ViewState, scenarioId: string): ViewState {
  return {
    ...state,
    selectedScenarioId: scenarioId,
    toggles: defaultToggles(state.portfolio, scenarioId),
    calibration: null,
    lastWhatIf: null,
  };
}

/** Flipping a checkbox invalidates the displayed what-if result: numbers on
 * screen must always come from a response that matches the toggle set. */
export function toggleControl(state: ViewState, controlId: string): ViewState {
  if (!(controlId in state.toggles)) {
    return state;
  }
  return {
    ...state,
    toggles: { ...state.toggles, [controlId]: !state.toggles[controlId] },
    lastWhatIf: null,
  };
}

/** Server-calibrated parameters are echoed into the selected scenario's
 * severity model for the given loss category; the edit is unsaved until PUT. */
export function applyCalibration(
  state: ViewState,
  category: string,
  response: CalibrateResponse,
): ViewState {
  if (!state.portfolio || !state.selectedScenarioId) {
    return { ...state, calibration: response };
  }
  const scenarios = state.portfolio.scenarios.map((s) => {
    if (s.id !== state.selectedScenarioId) {
      return s;
    }
    return {
      ...s,
      severities: {
        ...s.severities,
        [category]: { type: "lognormal", mu: response.mu, sigma: response.sigma },
      },
    };
  });
  return {
    ...state,
    portfolio: { ...state.portfolio, scenarios },
    calibration: response,
    dirty: true,
    inlineFindings: [],
    lastSimulation: null,
    lastWhatIf: null,
  };
}

export function markSaved(state: ViewState, revision: number): ViewState {
  return { ...state, dirty: false, revision };
}

export function setSimulation(state: ViewState, response: SimulateResponse): ViewState {
  return { ...state, lastSimulation: response, error: null };
}

export function setWhatIf(state: ViewState, response: WhatIfResponse): ViewState {
  return { ...state, lastWhatIf: response, error: null };
}

export function setInlineFindings(state: ViewState, findings: Finding[]): ViewState {
  return { ...state, inlineFindings: findings };
}

export function setError(state: ViewState, message: string | null): ViewState {
  return { ...state, error: message };
}

export function requestStarted(state: ViewState): ViewState {
  return state.inFlight > 0
    ? { ...state, queued: state.queued + 1 }
    : { ...state, inFlight: 1 };
}

export function requestFinished(state: ViewState): ViewState {
  return state.queued > 0
    ? { ...state, queued: state.queued - 1 }
    : { ...state, inFlight: Math.max(0, state.inFlight - 1) };
}

export function selectedScenario(state: ViewState) {
  if (!state.portfolio || !state.selectedScenarioId) {
    return null;
  }
  return state.portfolio.scenarios.find((s) => s.id === state.selectedScenarioId) ?? null;
}

export function enabledToggles(state: ViewState): { id: string; enabled: boolean }[] {
  return Object.keys(state.toggles)
    .sort()
    .map((id) => ({ id, enabled: state.toggles[id] === true }));
}
