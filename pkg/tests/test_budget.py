import json
import math

import jsonschema
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errorkit.budget import (
    BudgetComponent,
    BudgetError,
    ErrorBudget,
    UnitResolutionError,
    load_budget,
    monte_carlo_std,
    total_std,
)
from errorkit.dataset import bundled_path


def example_budget():
    """Four independent components whose contributions are 1, 2, 3, 1 mm."""
    return ErrorBudget(
        components=(
            BudgetComponent(name="additive", std=1.0, unit="mm"),
            BudgetComponent(
                name="scale", std=2.0, unit="ppm", sensitivity="proportional"
            ),
            BudgetComponent(name="cycle", std=3.0, unit="mm"),
            BudgetComponent(name="resolution", std=1.0, unit="mm"),
        ),
        operating_point_m=1000.0,
    )


class TestComponentValidation:
    def test_negative_std(self):
        with pytest.raises(BudgetError, match="std must be >= 0"):
            BudgetComponent(name="x", std=-1.0)

    def test_unknown_unit(self):
        with pytest.raises(BudgetError, match="unknown unit"):
            BudgetComponent(name="x", std=1.0, unit="furlong")

    def test_unknown_shape(self):
        with pytest.raises(BudgetError, match="unknown shape"):
            BudgetComponent(name="x", std=1.0, shape="triangular")

    def test_unknown_sensitivity_string(self):
        with pytest.raises(BudgetError, match="unknown sensitivity"):
            BudgetComponent(name="x", std=1.0, sensitivity="quadratic")

    def test_nonfinite_numeric_sensitivity(self):
        with pytest.raises(BudgetError, match="finite"):
            BudgetComponent(name="x", std=1.0, sensitivity=math.inf)


class TestBudgetValidation:
    def test_duplicate_names(self):
        parts = (
            BudgetComponent(name="x", std=1.0),
            BudgetComponent(name="x", std=2.0),
        )
        with pytest.raises(BudgetError, match="unique"):
            ErrorBudget(components=parts)

    def test_proportional_needs_operating_point(self):
        parts = (BudgetComponent(name="scale", std=2.0, unit="ppm"),)
        with pytest.raises(BudgetError, match="operating_point_m"):
            ErrorBudget(components=parts)

    def test_operating_point_optional_without_proportional_parts(self):
        budget = ErrorBudget(components=(BudgetComponent(name="x", std=1.0),))
        assert budget.operating_point_m == 0.0


class TestTotalStd:
    def test_root_sum_of_squares(self):
        # contributions 1, 2, 3, 1 mm combine to sqrt(15) exactly
        assert total_std(example_budget()) == math.sqrt(15.0)

    def test_empty_budget(self):
        assert total_std(ErrorBudget(components=())) == 0.0

    def test_single_component_is_its_own_total(self):
        budget = ErrorBudget(components=(BudgetComponent(name="x", std=2.5),))
        assert total_std(budget) == 2.5

    def test_custom_coefficient_scales_a_mm_component(self):
        budget = ErrorBudget(
            components=(BudgetComponent(name="x", std=2.0, sensitivity=3.0),)
        )
        assert total_std(budget) == 6.0

    def test_ppm_component_resolves_through_operating_point(self):
        # 2 ppm of 500 m is 1 mm
        budget = ErrorBudget(
            components=(
                BudgetComponent(
                    name="scale", std=2.0, unit="ppm", sensitivity="proportional"
                ),
            ),
            operating_point_m=500.0,
        )
        assert total_std(budget) == pytest.approx(1.0, rel=1e-14)

    def test_ppm_with_constant_sensitivity_is_unresolvable(self):
        budget = ErrorBudget(
            components=(
                BudgetComponent(
                    name="scale", std=2.0, unit="ppm", sensitivity="constant"
                ),
            ),
            operating_point_m=1000.0,
        )
        with pytest.raises(UnitResolutionError, match="operating point") as excinfo:
            total_std(budget)
        assert excinfo.value.component == "scale"

    def test_ppm_with_custom_coefficient_is_unresolvable(self):
        budget = ErrorBudget(
            components=(
                BudgetComponent(name="scale", std=2.0, unit="ppm", sensitivity=2.0),
            ),
            operating_point_m=1000.0,
        )
        with pytest.raises(UnitResolutionError, match="no custom coefficient"):
            total_std(budget)

    def test_mm_with_proportional_sensitivity_is_unresolvable(self):
        budget = ErrorBudget(
            components=(
                BudgetComponent(
                    name="x", std=1.0, unit="mm", sensitivity="proportional"
                ),
            ),
            operating_point_m=1000.0,
        )
        with pytest.raises(UnitResolutionError, match="requires a ppm std"):
            total_std(budget)

    @settings(max_examples=50)
    @given(
        stds=st.lists(
            st.floats(min_value=0.0, max_value=100.0), min_size=1, max_size=6
        ),
        k=st.sampled_from([0.25, 0.5, 2.0, 4.0, 1024.0]),
    )
    def test_scale_equivariance_exact_for_powers_of_two(self, stds, k):
        base = ErrorBudget(
            components=tuple(
                BudgetComponent(name=f"c{i}", std=s) for i, s in enumerate(stds)
            )
        )
        scaled = ErrorBudget(
            components=tuple(
                BudgetComponent(name=f"c{i}", std=k * s) for i, s in enumerate(stds)
            )
        )
        assert total_std(scaled) == k * total_std(base)

    def test_scale_equivariance_general(self):
        stds = (1.0, 2.0, 3.0, 1.0)
        base = ErrorBudget(
            components=tuple(
                BudgetComponent(name=f"c{i}", std=s) for i, s in enumerate(stds)
            )
        )
        scaled = ErrorBudget(
            components=tuple(
                BudgetComponent(name=f"c{i}", std=3.7 * s) for i, s in enumerate(stds)
            )
        )
        assert total_std(scaled) == pytest.approx(3.7 * total_std(base), rel=1e-12)

    @settings(max_examples=50)
    @given(
        stds=st.lists(
            st.floats(min_value=0.0, max_value=100.0), min_size=1, max_size=5
        ),
        extra=st.floats(min_value=0.0, max_value=100.0),
    )
    def test_adding_a_component_never_shrinks_the_total(self, stds, extra):
        parts = tuple(
            BudgetComponent(name=f"c{i}", std=s) for i, s in enumerate(stds)
        )
        grown = parts + (BudgetComponent(name="extra", std=extra),)
        assert total_std(ErrorBudget(components=grown)) >= total_std(
            ErrorBudget(components=parts)
        )


class TestMonteCarlo:
    def test_rejects_small_draw_counts(self):
        with pytest.raises(BudgetError, match="10\\^4"):
            monte_carlo_std(example_budget(), n=9_999, seed=1)

    def test_reproducible_for_a_seed(self):
        budget = example_budget()
        a = monte_carlo_std(budget, n=10_000, seed=77)
        b = monte_carlo_std(budget, n=10_000, seed=77)
        assert a == b

    def test_different_seeds_differ(self):
        budget = example_budget()
        assert monte_carlo_std(budget, n=10_000, seed=1) != monte_carlo_std(
            budget, n=10_000, seed=2
        )

    @pytest.mark.parametrize("shape", ["gaussian", "arcsine", "uniform"])
    def test_each_shape_reproduces_its_std(self, shape):
        budget = ErrorBudget(
            components=(BudgetComponent(name="only", std=2.5, shape=shape),)
        )
        estimate = monte_carlo_std(budget, n=100_000, seed=123)
        assert estimate == pytest.approx(2.5, rel=0.02)

    def test_matches_analytic_total(self):
        budget = example_budget()
        estimate = monte_carlo_std(budget, n=100_000, seed=123)
        assert estimate == pytest.approx(total_std(budget), rel=0.02)

    def test_shape_overrides_change_the_draws_not_the_std(self):
        budget = example_budget()
        default = monte_carlo_std(budget, n=100_000, seed=123)
        overridden = monte_carlo_std(
            budget,
            n=100_000,
            seed=123,
            shapes={"cycle": "arcsine", "resolution": "uniform"},
        )
        assert overridden != default
        assert overridden == pytest.approx(total_std(budget), rel=0.02)

    def test_unknown_shape_override(self):
        with pytest.raises(BudgetError, match="unknown shape"):
            monte_carlo_std(
                example_budget(), n=10_000, seed=1, shapes={"cycle": "bimodal"}
            )

    def test_estimate_converges_with_draw_count(self):
        # seed pinned: the error is only shrinking in expectation, and
        # this seed happens to give a strictly shrinking realization
        budget = example_budget()
        analytic = total_std(budget)
        errors = [
            abs(monte_carlo_std(budget, n=n, seed=42) - analytic)
            for n in (10_000, 100_000, 1_000_000)
        ]
        assert errors[0] > errors[1] > errors[2]


class TestLoadBudget:
    def test_bundled_example(self):
        budget = load_budget(bundled_path("budget_example.json"))
        assert budget.operating_point_m == 1000.0
        assert len(budget.components) == 4
        assert total_std(budget) == math.sqrt(15.0)

    def test_ppm_defaults_to_proportional(self, tmp_path):
        p = tmp_path / "budget.json"
        p.write_text(
            json.dumps(
                {
                    "operating_point_m": 500.0,
                    "components": [{"name": "scale", "std": 2.0, "unit": "ppm"}],
                }
            )
        )
        budget = load_budget(p)
        assert budget.components[0].sensitivity == "proportional"
        assert total_std(budget) == pytest.approx(1.0, rel=1e-14)

    def test_missing_std_rejected_by_schema(self, tmp_path):
        p = tmp_path / "budget.json"
        p.write_text(json.dumps({"components": [{"name": "x", "unit": "mm"}]}))
        with pytest.raises(jsonschema.ValidationError):
            load_budget(p)

    def test_unknown_key_rejected_by_schema(self, tmp_path):
        p = tmp_path / "budget.json"
        p.write_text(
            json.dumps(
                {"components": [{"name": "x", "std": 1.0, "unit": "mm", "sd": 2}]}
            )
        )
        with pytest.raises(jsonschema.ValidationError):
            load_budget(p)

    def test_bad_sensitivity_rejected_by_schema(self, tmp_path):
        p = tmp_path / "budget.json"
        p.write_text(
            json.dumps(
                {
                    "components": [
                        {
                            "name": "x",
                            "std": 1.0,
                            "unit": "mm",
                            "sensitivity": "quadratic",
                        }
                    ]
                }
            )
        )
        with pytest.raises(jsonschema.ValidationError):
            load_budget(p)

    def test_custom_numeric_sensitivity_accepted(self, tmp_path):
        p = tmp_path / "budget.json"
        p.write_text(
            json.dumps(
                {
                    "components": [
                        {"name": "x", "std": 2.0, "unit": "mm", "sensitivity": 3.0}
                    ]
                }
            )
        )
        assert total_std(load_budget(p)) == 6.0
