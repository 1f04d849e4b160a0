/** DOM glue: wires events to state transitions and API calls. Simulation and
 * what-if requests run strictly one at a time; later submissions queue. */

import { ApiClient, ApiFailure } from "./api.js";
import * as state from "./state.js";
import { renderApp } from "./views.js";

const client = new ApiClient("");
let current = state.initialState();
const root = document.querySelector<HTMLDivElement>("#app");

function update(next: state.ViewState): void {
  current = next;
  if (root) {
    root.innerHTML = renderApp(current);
  }
}

/** Serialized execution: at most one simulation-class request in flight. */
let chain: Promise<unknown> = Promise.resolve();

function enqueue(task: () => Promise<void>): void {
  update(state.requestStarted(current));
  chain = chain
    .then(task)
    .catch((err) => handleFailure(err))
    .finally(() => update(state.requestFinished(current)));
}

function handleFailure(err: unknown): void {
  if (err instanceof ApiFailure) {
    if (err.body.findings.length > 0) {
      update(state.setInlineFindings(current, err.body.findings));
    } else {
      update(state.setError(current, `${err.body.code}: ${err.body.message}`));
    }
  } else {
    update(state.setError(current, String(err)));
  }
}

function numberInput(form: HTMLFormElement, name: string): number {
  const field = form.elements.namedItem(name) as HTMLInputElement | null;
  return field ? Number(field.value) : NaN;
}

function stringInput(form: HTMLFormElement, name: string): string {
  const field = form.elements.namedItem(name) as HTMLInputElement | HTMLSelectElement | null;
  return field ? field.value : "";
}

document.addEventListener("click", (event) => {
  const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
  if (!target) {
    return;
  }
  const action = target.dataset.action;
  if (action === "tab") {
    update(state.setTab(current, target.dataset.tab as state.Tab));
  } else if (action === "select-domain") {
    update(state.selectDomain(current, target.dataset.domain ?? ""));
  } else if (action === "toggle-control") {
    update(state.toggleControl(current, (target as HTMLInputElement).dataset.control ?? ""));
  } else if (action === "save-portfolio") {
    const doc = current.portfolio;
    const revision = current.revision;
    if (!doc || revision === null) {
      return;
    }
    enqueue(async () => {
      const saved = await client.putPortfolio(doc, revision);
      update(state.markSaved(current, saved.revision));
    });
  }
});

document.addEventListener("change", (event) => {
  const target = event.target as HTMLElement;
  if (target.matches("select[data-action='select-scenario']")) {
    update(state.selectScenario(current, (target as HTMLSelectElement).value));
  }
});

document.addEventListener("submit", (event) => {
  const form = event.target as HTMLFormElement;
  const action = form.dataset.action;
  if (!action) {
    return;
  }
  event.preventDefault();
  if (action === "load-portfolio") {
    const id = stringInput(form, "portfolio_id");
    enqueue(async () => {
      const envelope = await client.getPortfolio(id);
      update(state.setPortfolio(current, envelope.portfolio, envelope.revision));
    });
  } else if (action === "calibrate") {
    const category = stringInput(form, "category");
    const lower = numberInput(form, "lower");
    const upper = numberInput(form, "upper");
    const confidence = numberInput(form, "confidence");
    enqueue(async () => {
      update(state.setInlineFindings(current, []));
      const fit = await client.calibrateLognormal(lower, upper, confidence);
      update(state.applyCalibration(current, category, fit));
    });
  } else if (action === "simulate") {
    const portfolioId = current.portfolio?.id;
    if (!portfolioId) {
      return;
    }
    const trials = numberInput(form, "trials");
    const seed = numberInput(form, "seed");
    enqueue(async () => {
      const result = await client.simulate(portfolioId, trials, seed, [0.5, 0.9, 0.95, 0.99]);
      update(state.setSimulation(current, result));
    });
  } else if (action === "whatif") {
    const portfolioId = current.portfolio?.id;
    const scenarioId = current.selectedScenarioId;
    if (!portfolioId || !scenarioId) {
      return;
    }
    const trials = numberInput(form, "trials");
    const seed = numberInput(form, "seed");
    const toggles = state.enabledToggles(current);
    enqueue(async () => {
      const result = await client.whatIf(portfolioId, scenarioId, trials, seed, [0.5, 0.95], toggles);
      update(state.setWhatIf(current, result));
    });
  }
});

enqueue(async () => {
  const taxonomy = await client.getTaxonomy();
  update(state.setTaxonomy(current, taxonomy));
});
