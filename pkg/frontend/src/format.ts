/** Display helpers. Metric values are shown verbatim: the string on screen is
 * String(value) of the field as parsed from the API response, never a
 * client-side computation or reformatting of it. */

export function verbatim(value: number | string | boolean | null | undefined): string {
  if (value === null || value === undefined) {
    return "n/a";
  }
  return String(value);
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** Annotation line carried on every chart and metric card. */
export function provenance(seed: number, trials: number, taxonomyVersion: string): string {
  return `seed ${verbatim(seed)} · ${verbatim(trials)} trials · taxonomy ${verbatim(taxonomyVersion)}`;
}
