import { describe, expect, it } from 'vitest';
import { WorkingPatch } from '../src/patch';
import { mockCatalog } from './mocks';

const EMPTY_DOC = {
  version: 1,
  activation_overrides: {},
  enable_overrides: {},
  latent_edits: {},
  seed: null,
};

describe('WorkingPatch', () => {
  it('starts empty and serializes to the canonical empty document', () => {
    const patch = new WorkingPatch();
    expect(patch.isEmpty()).toBe(true);
    expect(patch.toDoc()).toEqual(EMPTY_DOC);
  });

  it('keeps only deviations for enable overrides', () => {
    const patch = new WorkingPatch();
    patch.setEnabled('syn.0.conv', false);
    expect(patch.toDoc().enable_overrides).toEqual({ 'syn.0.conv': false });
    patch.setEnabled('syn.0.conv', true);
    expect(patch.isEmpty()).toBe(true);
  });

  it('sorts override and latent keys in the emitted document', () => {
    const patch = new WorkingPatch();
    patch.setOverride('syn.1.conv', { kind: 'relu', params: {} });
    patch.setOverride('map.0', { kind: 'tanh', params: {} });
    patch.setLatentEdit(10, 0.5);
    patch.setLatentEdit(2, -1);
    const doc = patch.toDoc();
    expect(Object.keys(doc.activation_overrides)).toEqual(['map.0', 'syn.1.conv']);
    expect(Object.keys(doc.latent_edits)).toEqual(['2', '10']);
  });

  it('reset restores the empty document', () => {
    const patch = new WorkingPatch();
    patch.setOverride('map.0', { kind: 'sinlu', params: { a: 2, b: 3 } });
    patch.setEnabled('syn.3.torgb', false);
    patch.setLatentEdit(0, 1.5);
    patch.seed = 7;
    patch.reset();
    expect(patch.isEmpty()).toBe(true);
    expect(patch.toDoc()).toEqual(EMPTY_DOC);
  });

  describe('validate', () => {
    const catalog = mockCatalog();

    it('accepts a well-formed override', () => {
      const patch = new WorkingPatch();
      patch.setOverride('map.0', { kind: 'sinlu', params: { a: 1, b: 1 } });
      expect(patch.validate(catalog)).toEqual([]);
    });

    it('rejects unknown kinds', () => {
      const patch = new WorkingPatch();
      patch.setOverride('map.0', { kind: 'gelu', params: {} });
      expect(patch.validate(catalog)[0]).toMatch(/unknown activation/);
    });

    it('rejects wrong parameter sets', () => {
      const patch = new WorkingPatch();
      patch.setOverride('map.0', { kind: 'sinlu', params: { a: 1 } });
      expect(patch.validate(catalog)).toHaveLength(1);
    });

    it('requires exactly degree+1 poly weights', () => {
      const patch = new WorkingPatch();
      patch.setOverride('map.0', {
        kind: 'poly',
        params: { degree: 2, w0: 1, w1: 1, w2: 1, w3: 1 },
      });
      expect(patch.validate(catalog)[0]).toMatch(/weights/);
      patch.setOverride('map.0', { kind: 'poly', params: { degree: 2, w0: 1, w1: 1, w2: 1 } });
      expect(patch.validate(catalog)).toEqual([]);
    });

    it('rejects out-of-range poly degree', () => {
      const patch = new WorkingPatch();
      patch.setOverride('map.0', { kind: 'poly', params: { degree: 4, w0: 1 } });
      expect(patch.validate(catalog)[0]).toMatch(/degree/);
    });

    it('rejects non-finite values', () => {
      const patch = new WorkingPatch();
      patch.setOverride('map.0', { kind: 'sinlu', params: { a: NaN, b: 1 } });
      expect(patch.validate(catalog)[0]).toMatch(/not finite/);
      const other = new WorkingPatch();
      other.setLatentEdit(3, Infinity);
      expect(other.validate(catalog)[0]).toMatch(/not finite/);
    });
  });
});
