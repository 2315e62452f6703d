import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import type { SessionJson } from "../src/types.js";
import {
  decisionColor,
  effectBand,
  effectSize,
  flipSquares,
  formatPercent,
  policyLabel,
  toViewModel,
} from "../src/viewModel.js";

const here = dirname(fileURLToPath(import.meta.url));
const fixture: SessionJson = JSON.parse(
  readFileSync(join(here, "fixtures", "session.json"), "utf-8"),
);

describe("view model projection", () => {
  it("mirrors the recorded API JSON field for field", () => {
    const vm = toViewModel(fixture);
    expect(vm.id).toBe(fixture.id);
    expect(vm.alpha).toBe(fixture.alpha);
    expect(vm.eta).toBe(fixture.eta);
    expect(vm.wealth).toBe(fixture.wealth);
    expect(vm.dataset).toBe(fixture.dataset);
    expect(vm.rowCount).toBe(fixture.row_count);
    expect(vm.records).toHaveLength(fixture.records.length);
    fixture.records.forEach((record, i) => {
      const view = vm.records[i];
      expect(view.id).toBe(record.id);
      expect(view.description).toBe(record.description);
      expect(view.kind).toBe(record.kind);
      expect(view.pValue).toBe(record.p_value);
      expect(view.support).toBe(record.support);
      expect(view.budget).toBe(record.budget);
      expect(view.decision).toBe(record.decision);
      expect(view.starred).toBe(record.starred);
      expect(view.supersededBy).toBe(record.superseded_by);
      expect(view.flipToReject).toBe(record.flip_factor_to_reject);
      expect(view.flipToAccept).toBe(record.flip_factor_to_accept);
    });
  });

  it("contains the expected mix of record states", () => {
    const decisions = fixture.records.map((r) => r.decision);
    expect(decisions).toContain("descriptive");
    expect(decisions).toContain("rejected");
    expect(decisions).toContain("accepted");
    expect(fixture.records.some((r) => r.superseded_by !== null)).toBe(true);
  });

  it("colors decisions green iff rejected, red iff accepted", () => {
    expect(decisionColor("rejected")).toBe("green");
    expect(decisionColor("accepted")).toBe("red");
    expect(decisionColor("untested")).toBe("gray");
    expect(decisionColor("descriptive")).toBe("gray");
    const vm = toViewModel(fixture);
    for (const record of vm.records) {
      if (record.decision === "rejected") expect(record.color).toBe("green");
      else if (record.decision === "accepted") expect(record.color).toBe("red");
      else expect(record.color).toBe("gray");
    }
  });

  it("labels the policy from its parameters", () => {
    expect(policyLabel({ name: "fixed", gamma: 10 })).toBe("fixed(gamma=10)");
    expect(policyLabel({ name: "hybrid", epsilon: 0.5, window: null })).toBe(
      "hybrid(epsilon=0.5)",
    );
    expect(policyLabel({ name: "pcer" })).toBe("pcer");
  });

  it("formats the gauge percentages", () => {
    expect(formatPercent(0.05)).toBe("5%");
    expect(formatPercent(0.025)).toBe("2.5%");
    expect(formatPercent(0.0475)).toBe("4.75%");
  });
});

describe("flip squares", () => {
  it("renders five squares for a factor of 5", () => {
    expect(flipSquares(5.0)).toEqual({ full: 5, half: 0 });
  });

  it("renders 11 full plus one half square for 11.5", () => {
    expect(flipSquares(11.5)).toEqual({ full: 11, half: 1 });
  });

  it("renders one square for 1.0", () => {
    expect(flipSquares(1.0)).toEqual({ full: 1, half: 0 });
  });

  it("renders nothing when the factor is absent", () => {
    expect(flipSquares(null)).toEqual({ full: 0, half: 0 });
    expect(flipSquares(undefined)).toEqual({ full: 0, half: 0 });
  });

  it("rounds fractional parts below a half up to a full square", () => {
    expect(flipSquares(5.3)).toEqual({ full: 6, half: 0 });
    expect(flipSquares(5.7)).toEqual({ full: 5, half: 1 });
  });
});

describe("effect size", () => {
  it("uses phi for chi-squared records", () => {
    const size = effectSize({
      ...fixture.records[0],
      kind: "chi2_gof",
      statistic: 4.0,
      support: 100,
      df: 1,
    });
    expect(size).toBeCloseTo(0.2, 12);
  });

  it("bands at the configurable thresholds", () => {
    expect(effectBand(null)).toBe("none");
    expect(effectBand(0.05)).toBe("none");
    expect(effectBand(0.15)).toBe("small");
    expect(effectBand(0.35)).toBe("medium");
    expect(effectBand(0.8)).toBe("large");
  });
});
