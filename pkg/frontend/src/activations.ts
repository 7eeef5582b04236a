// Client-side mirror of the engine's activation formulas, used only for
// drawing curve previews; the server remains the authority for rendering.

import type { ActivationSpecJson } from './types';

const SQRT2 = Math.SQRT2;

function sigmoid(x: number): number {
  if (x >= 0) return 1 / (1 + Math.exp(-x));
  const e = Math.exp(x);
  return e / (1 + e);
}

export function evalActivation(spec: ActivationSpecJson, x: number): number {
  const p = spec.params;
  switch (spec.kind) {
    case 'relu':
      return Math.max(0, x);
    case 'leaky_relu':
      return x >= 0 ? x : p.slope * x;
    case 'sigmoid':
      return sigmoid(x);
    case 'tanh':
      return Math.tanh(x);
    case 'silu':
      return x * sigmoid(x);
    case 'sinlu':
      return (x + p.a * Math.sin(p.b * x)) * sigmoid(x);
    case 'relun':
      return Math.min(Math.max(0, x), p.n);
    case 'shilu':
      return p.a * Math.max(0, x) + p.b;
    case 'poly': {
      const degree = Math.trunc(p.degree);
      const s = sigmoid(x);
      let acc = 0;
      let power = 1;
      for (let i = 0; i <= degree; i++) {
        if (i > 0) power *= s;
        acc += p[`w${i}`] * power;
      }
      return acc / Math.pow(SQRT2, degree);
    }
    default:
      throw new Error(`unknown activation kind ${spec.kind}`);
  }
}

export function sampleCurve(
  spec: ActivationSpecJson,
  xMin: number,
  xMax: number,
  n: number
): [number, number][] {
  const points: [number, number][] = [];
  for (let i = 0; i < n; i++) {
    const x = xMin + ((xMax - xMin) * i) / (n - 1);
    points.push([x, evalActivation(spec, x)]);
  }
  return points;
}
