// Game24 rules in exact rational arithmetic, matching the engine's action
// text format byte for byte: "x op y = z (left: a, b, c)" over a sorted
// multiset, deduplicated by resulting multiset, first enumeration wins.

import { Rational } from "./rational";

const TARGET = new Rational(24n);

export interface LegalAction {
  text: string;
  next: Rational[]; // sorted
}

export function parseState(text: string): Rational[] {
  const tokens = text.trim().split(/\s+/);
  if (tokens.length < 1 || tokens.length > 4 || tokens[0] === "") {
    throw new Error(`bad state text: ${JSON.stringify(text)}`);
  }
  return sortNumbers(tokens.map(Rational.parse));
}

export function renderState(numbers: Rational[]): string {
  return numbers.map((n) => n.render()).join(" ");
}

function sortNumbers(numbers: Rational[]): Rational[] {
  return [...numbers].sort((a, b) => a.compare(b));
}

function opResults(x: Rational, y: Rational): Array<[Rational, string, Rational, Rational]> {
  const ops: Array<[Rational, string, Rational, Rational]> = [
    [x, "+", y, x.add(y)],
    [x, "-", y, x.sub(y)],
    [y, "-", x, y.sub(x)],
    [x, "*", y, x.mul(y)],
  ];
  if (!y.isZero()) ops.push([x, "/", y, x.div(y)]);
  if (!x.isZero()) ops.push([y, "/", x, y.div(x)]);
  return ops;
}

export function legalActions(numbers: Rational[]): LegalAction[] {
  if (numbers.length <= 1) return [];
  const sorted = sortNumbers(numbers);
  const seen = new Set<string>();
  const actions: LegalAction[] = [];
  for (let i = 0; i < sorted.length; i++) {
    for (let j = i + 1; j < sorted.length; j++) {
      const rest = sorted.filter((_, k) => k !== i && k !== j);
      for (const [lhs, op, rhs, z] of opResults(sorted[i], sorted[j])) {
        const next = sortNumbers([...rest, z]);
        const key = renderState(next);
        if (seen.has(key)) continue;
        seen.add(key);
        const left = next.map((n) => n.render()).join(", ");
        actions.push({
          text: `${lhs.render()} ${op} ${rhs.render()} = ${z.render()} (left: ${left})`,
          next,
        });
      }
    }
  }
  return actions;
}

const solvableCache = new Map<string, boolean>();

export function solvable(numbers: Rational[]): boolean {
  const sorted = sortNumbers(numbers);
  if (sorted.length === 1) return sorted[0].equals(TARGET);
  const key = renderState(sorted);
  const cached = solvableCache.get(key);
  if (cached !== undefined) return cached;
  solvableCache.set(key, false); // cycle guard; Game24 has none, but cheap
  let result = false;
  for (const action of legalActions(sorted)) {
    if (solvable(action.next)) {
      result = true;
      break;
    }
  }
  solvableCache.set(key, result);
  return result;
}

export function stateValue(text: string): number {
  return solvable(parseState(text)) ? 1.0 : 0.0;
}

// Noise-free variant of the engine's oracle proposal rule: logits are
// beta * solvable(child), softmaxed at the requested temperature, top-w by
// probability (ties by action text).
export const PROPOSE_BETA = 6.0;

export function proposeActions(
  text: string,
  w: number,
  temperature: number,
): Array<{ text: string; logprob: number }> {
  const numbers = parseState(text);
  const actions = legalActions(numbers);
  if (actions.length === 0) {
    throw new Error(`no legal actions for terminal state ${JSON.stringify(text)}`);
  }
  const temp = Math.max(temperature, 1e-9);
  const scored = actions.map((a) => ({
    text: a.text,
    logit: (PROPOSE_BETA * (solvable(a.next) ? 1.0 : 0.0)) / temp,
  }));
  const top = Math.max(...scored.map((s) => s.logit));
  const logZ = top + Math.log(scored.reduce((acc, s) => acc + Math.exp(s.logit - top), 0));
  return scored
    .map((s) => ({ text: s.text, logprob: s.logit - logZ }))
    .sort((a, b) => (b.logprob - a.logprob) || (a.text < b.text ? -1 : a.text > b.text ? 1 : 0))
    .slice(0, Math.max(1, w));
}
