/** Pure HTML renderers. Every metric shown comes verbatim from a stored API
 * response (see format.verbatim); views add structure and labels only. */

import type { ControlDoc, DomainDoc, Finding, MetricsDoc, ModelDoc } from "./api.js";
import { exceedanceChartSvg } from "./chart.js";
import { escapeHtml as esc, provenance, verbatim } from "./format.js";
import { selectedScenario, type ViewState } from "./state.js";

const TABS: { id: string; label: string }[] = [
  { id: "taxonomy", label: "Taxonomy" },
  { id: "scenarios", label: "Scenarios" },
  { id: "simulation", label: "Simulation" },
  { id: "whatif", label: "What-if" },
];

export function renderApp(state: ViewState): string {
  const tabs = TABS.map(
    (t) =>
      `<button class="tab${state.tab === t.id ? " active" : ""}" data-action="tab" data-tab="${t.id}">${t.label}</button>`,
  ).join("");
  const busy = state.inFlight > 0
    ? `<span class="busy">running… ${state.queued > 0 ? `(${state.queued} queued)` : ""}</span>`
    : "";
  const error = state.error ? `<div class="error-banner">${esc(state.error)}</div>` : "";
  return `
    <header>
      <h1>airisk workbench</h1>
      <nav>${tabs}</nav>
      ${busy}
    </header>
    ${error}
    <main>${renderActivePanel(state)}</main>
  `;
}

function renderActivePanel(state: ViewState): string {
  switch (state.tab) {
    case "taxonomy":
      return renderTaxonomyPanel(state);
    case "scenarios":
      return renderScenarioPanel(state);
    case "simulation":
      return renderSimulationPanel(state);
    case "whatif":
      return renderWhatIfPanel(state);
  }
}

// --- taxonomy browser ---------------------------------------------------------

export function renderTaxonomyPanel(state: ViewState): string {
  if (!state.taxonomy) {
    return `<p class="placeholder">loading taxonomy…</p>`;
  }
  const list = state.taxonomy.domains
    .map(
      (d) =>
        `<li><button class="domain${d.id === state.selectedDomainId ? " active" : ""}" data-action="select-domain" data-domain="${d.id}">${esc(d.name)} <span class="count">${d.sub_threats.length}</span></button></li>`,
    )
    .join("");
  const selected = state.taxonomy.domains.find((d) => d.id === state.selectedDomainId);
  return `
    <div class="split">
      <aside><ul class="domain-list">${list}</ul>
        <p class="muted">taxonomy ${esc(state.taxonomy.taxonomy_version)}</p>
      </aside>
      <section>${selected ? renderDomainDetail(state, selected) : ""}</section>
    </div>
  `;
}

function lossBadges(categories: string[]): string {
  return categories
    .map((c) => `<span class="badge loss-${c.toLowerCase()}">${esc(c)}</span>`)
    .join(" ");
}

export function renderDomainDetail(state: ViewState, domain: DomainDoc): string {
  const anchors = state.taxonomy?.crosswalk[domain.id] ?? [];
  const anchorHtml = anchors.length
    ? `<ul class="anchors">${anchors
        .map(
          (a) =>
            `<li><span class="badge framework">${esc(a.framework)}</span> ${esc(a.reference)}${a.note ? ` <span class="muted">${esc(a.note)}</span>` : ""}</li>`,
        )
        .join("")}</ul>`
    : `<p class="muted">no published regulatory anchors for this domain</p>`;
  const subs = domain.sub_threats
    .map(
      (s) => `
      <tr>
        <td><code>${esc(s.id)}</code></td>
        <td>${esc(s.name)}</td>
        <td><span class="badge pattern">${esc(s.temporal_pattern)}</span></td>
        <td><span class="badge profile">${esc(s.impact_profile)}</span></td>
        <td>${s.lifecycle_phases.map((p) => `<span class="badge phase">${esc(p)}</span>`).join(" ")}</td>
      </tr>`,
    )
    .join("");
  return `
    <h2>${esc(domain.name)} ${lossBadges(domain.loss_categories)}</h2>
    <p>${esc(domain.description)}</p>
    <p class="muted">${esc(domain.prevalence_note)}</p>
    <h3>Regulatory anchors</h3>
    ${anchorHtml}
    <h3>Sub-threats</h3>
    <table class="subthreats">
      <thead><tr><th>id</th><th>name</th><th>temporal</th><th>impact</th><th>lifecycle</th></tr></thead>
      <tbody>${subs}</tbody>
    </table>
  `;
}

// --- scenario editor -------------------------------------------------------------

function modelSummary(model: ModelDoc): string {
  const params = Object.entries(model)
    .filter(([k]) => k !== "type")
    .map(([k, v]) => `${esc(k)}=${esc(JSON.stringify(v))}`)
    .join(", ");
  return `<code>${esc(model.type)}(${params})</code>`;
}

function findingsFor(findings: Finding[], field: string): string {
  const hits = findings.filter((f) => f.field === field || field === "*");
  if (!hits.length) {
    return "";
  }
  return hits
    .map((f) => `<p class="finding" data-field="${esc(f.field)}">[${esc(f.code)}] ${esc(f.message)}</p>`)
    .join("");
}

export function renderScenarioPanel(state: ViewState): string {
  if (!state.portfolio) {
    return renderPortfolioLoader(state);
  }
  const scenario = selectedScenario(state);
  const options = state.portfolio.scenarios
    .map(
      (s) =>
        `<option value="${esc(s.id)}"${s.id === state.selectedScenarioId ? " selected" : ""}>${esc(s.id)} — ${esc(s.title)}</option>`,
    )
    .join("");
  if (!scenario) {
    return `<p class="placeholder">portfolio has no scenarios</p>`;
  }
  const severities = Object.entries(scenario.severities)
    .map(([cat, model]) => `<li><span class="badge loss-${cat.toLowerCase()}">${esc(cat)}</span> ${modelSummary(model)}</li>`)
    .join("");
  const categories = Object.keys(scenario.severities)
    .map((c) => `<option value="${esc(c)}">${esc(c)}</option>`)
    .join("");
  const calibrated = state.calibration
    ? `<p class="echo">server fit: mu = <b class="metric" data-metric="calibration-mu">${verbatim(state.calibration.mu)}</b>,
       sigma = <b class="metric" data-metric="calibration-sigma">${verbatim(state.calibration.sigma)}</b>
       (interval ${verbatim(state.calibration.lower)}–${verbatim(state.calibration.upper)} @ ${verbatim(state.calibration.confidence)})</p>`
    : "";
  return `
    <div class="panel">
      <label>scenario
        <select data-action="select-scenario">${options}</select>
      </label>
      <p class="muted">portfolio <b>${esc(state.portfolio.id)}</b> rev ${verbatim(state.revision)} ·
        sub-threat <code>${esc(scenario.sub_threat_id)}</code>
        ${state.dirty ? '<span class="badge dirty">unsaved edits</span>' : ""}</p>
      ${scenario.narrative ? `<p>${esc(scenario.narrative)}</p>` : ""}
      <h3>Frequency</h3>
      <p>${modelSummary(scenario.frequency)}</p>
      <h3>Severities</h3>
      <ul class="severities">${severities}</ul>
      <h3>Calibrate severity from an expert interval</h3>
      <form class="calibration" data-action="calibrate">
        <label>loss category <select name="category">${categories}</select></label>
        <label>low <input name="lower" type="number" step="any" value="10000"></label>
        <label>high <input name="upper" type="number" step="any" value="1000000"></label>
        <label>confidence <input name="confidence" type="number" step="0.01" min="0.01" max="0.99" value="0.9"></label>
        <button type="submit">Calibrate on server</button>
      </form>
      ${findingsFor(state.inlineFindings, "lower")}
      ${findingsFor(state.inlineFindings, "upper")}
      ${findingsFor(state.inlineFindings, "confidence")}
      ${calibrated}
      <button data-action="save-portfolio" ${state.dirty ? "" : "disabled"}>Save portfolio</button>
    </div>
  `;
}

function renderPortfolioLoader(state: ViewState): string {
  return `
    <div class="panel">
      <form class="loader" data-action="load-portfolio">
        <label>portfolio id <input name="portfolio_id" value="workbench-demo"></label>
        <button type="submit">Load</button>
      </form>
      ${findingsFor(state.inlineFindings, "portfolio_id")}
      <p class="muted">load a portfolio stored in the API session</p>
    </div>
  `;
}

// --- metric cards ------------------------------------------------------------------

export function metricCards(metrics: MetricsDoc, currency: string): string {
  const varsRows = Object.keys(metrics.var)
    .map(
      (c) => `
      <tr><td>${esc(c)}</td>
        <td class="metric" data-metric="var-${esc(c)}">${verbatim(metrics.var[c])}</td>
        <td class="metric" data-metric="tvar-${esc(c)}">${verbatim(metrics.tvar[c])}</td></tr>`,
    )
    .join("");
  const categories = Object.entries(metrics.per_category_eal)
    .map(
      ([cat, v]) =>
        `<li><span class="badge loss-${cat.toLowerCase()}">${esc(cat)}</span> <span class="metric" data-metric="cat-${esc(cat)}">${verbatim(v)}</span></li>`,
    )
    .join("");
  return `
    <div class="cards">
      <div class="card"><h4>EAL (${esc(currency)})</h4>
        <p class="metric big" data-metric="eal">${verbatim(metrics.eal)}</p></div>
      <div class="card"><h4>P(zero loss)</h4>
        <p class="metric big" data-metric="zero-loss">${verbatim(metrics.zero_loss_probability)}</p></div>
    </div>
    <table class="vartable">
      <thead><tr><th>confidence</th><th>VaR</th><th>TVaR</th></tr></thead>
      <tbody>${varsRows}</tbody>
    </table>
    ${categories ? `<ul class="categories">${categories}</ul>` : ""}
  `;
}

// --- simulation panel ------------------------------------------------------------------

export function renderSimulationPanel(state: ViewState): string {
  if (!state.portfolio) {
    return renderPortfolioLoader(state);
  }
  const form = `
    <form class="runner" data-action="simulate">
      <label>trials <input name="trials" type="number" value="100000" min="1" max="1000000"></label>
      <label>seed <input name="seed" type="number" value="42"></label>
      <button type="submit" ${state.dirty ? "disabled title='save edits first'" : ""}>Run simulation</button>
    </form>
  `;
  if (!state.lastSimulation) {
    return `<div class="panel">${form}<p class="placeholder">no simulation yet</p></div>`;
  }
  const r = state.lastSimulation;
  const currency = state.portfolio.scenarios[0]?.currency_code ?? "USD";
  const curve = r.portfolio.exceedance_curve ?? [];
  const scenarioBlocks = Object.entries(r.scenarios)
    .map(
      ([sid, m]) => `
      <details><summary><code>${esc(sid)}</code> EAL <span class="metric" data-metric="scenario-${esc(sid)}-eal">${verbatim(m.eal)}</span></summary>
        ${metricCards(m, currency)}
      </details>`,
    )
    .join("");
  return `
    <div class="panel">
      ${form}
      <p class="provenance">${provenance(r.seed, r.n_trials, r.taxonomy_version)}</p>
      <div class="cards">
        <div class="card reserve"><h4>Reserve @ ${verbatim(r.reserve.confidence)}</h4>
          <p class="metric big" data-metric="reserve">${verbatim(r.reserve.amount)}</p></div>
      </div>
      ${metricCards(r.portfolio, currency)}
      <h3>Loss exceedance curve</h3>
      ${exceedanceChartSvg(curve, r.portfolio.zero_loss_probability)}
      <p class="provenance">${provenance(r.seed, r.n_trials, r.taxonomy_version)}</p>
      <h3>Per-scenario</h3>
      ${scenarioBlocks}
    </div>
  `;
}

// --- what-if panel ----------------------------------------------------------------------

function controlRow(control: ControlDoc, enabled: boolean): string {
  return `
    <li>
      <label>
        <input type="checkbox" data-action="toggle-control" data-control="${esc(control.id)}" ${enabled ? "checked" : ""}>
        <b>${esc(control.name)}</b> <code>${esc(control.id)}</code>
        <span class="muted">freq −${verbatim(control.frequency_reduction)}, mag −${verbatim(control.magnitude_reduction)}, cost ${verbatim(control.annual_cost)}/yr</span>
      </label>
    </li>
  `;
}

export function renderWhatIfPanel(state: ViewState): string {
  if (!state.portfolio) {
    return renderPortfolioLoader(state);
  }
  const scenario = selectedScenario(state);
  if (!scenario) {
    return `<p class="placeholder">select a scenario first</p>`;
  }
  const controls = scenario.controls.length
    ? `<ul class="controls">${scenario.controls
        .map((c) => controlRow(c, state.toggles[c.id] === true))
        .join("")}</ul>`
    : `<p class="muted">scenario has no attached controls</p>`;
  const form = `
    <form class="runner" data-action="whatif">
      <label>trials <input name="trials" type="number" value="100000" min="1" max="1000000"></label>
      <label>seed <input name="seed" type="number" value="42"></label>
      <button type="submit">Evaluate what-if</button>
    </form>
  `;
  let results = `<p class="placeholder">toggle controls and evaluate</p>`;
  if (state.lastWhatIf) {
    const w = state.lastWhatIf;
    const deltaVar = Object.keys(w.delta.var)
      .map(
        (c) =>
          `<tr><td>${esc(c)}</td><td class="metric" data-metric="delta-var-${esc(c)}">${verbatim(w.delta.var[c])}</td></tr>`,
      )
      .join("");
    results = `
      <p class="provenance">${provenance(w.seed, w.n_trials, w.taxonomy_version)} ·
        enabled: ${w.enabled_controls.length ? w.enabled_controls.map(esc).join(", ") : "none"}</p>
      <div class="cards">
        <div class="card"><h4>baseline EAL</h4>
          <p class="metric big" data-metric="baseline-eal">${verbatim(w.baseline.eal)}</p></div>
        <div class="card"><h4>treated EAL</h4>
          <p class="metric big" data-metric="treated-eal">${verbatim(w.treated.eal)}</p></div>
        <div class="card delta"><h4>delta EAL</h4>
          <p class="metric big" data-metric="delta-eal">${verbatim(w.delta.eal)}</p></div>
      </div>
      <table class="vartable">
        <thead><tr><th>confidence</th><th>delta VaR</th></tr></thead>
        <tbody>${deltaVar}</tbody>
      </table>
      <div class="cards">
        <div class="card"><h4>annual cost</h4>
          <p class="metric" data-metric="annual-cost">${verbatim(w.annual_cost)}</p></div>
        <div class="card"><h4>net benefit</h4>
          <p class="metric" data-metric="net-benefit">${verbatim(w.net_benefit)}</p></div>
        <div class="card"><h4>ROSI</h4>
          <p class="metric" data-metric="rosi">${verbatim(w.rosi)}</p></div>
      </div>
    `;
  }
  return `
    <div class="panel">
      <p class="muted">scenario <code>${esc(scenario.id)}</code> — baseline strips all controls;
        the treated run applies the checked set under the same seed.</p>
      ${controls}
      ${form}
      ${results}
    </div>
  `;
}
