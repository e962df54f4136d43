import math

import numpy as np
import pytest

import fmig

HA = [[0.7, 0.3], [0.1, 0.9], [0.5, 0.5]]
HB = [[0.6, 0.4], [0.2, 0.8], [0.4, 0.6]]


def test_version():
    assert fmig.__version__ == fmig.version()


def test_worked_example():
    tasks = [(0, 0, 0), (1, 1, 1), (2, 2, 2)]
    assert fmig.empirical_mig(HA, HB, [0.5, 0.5], "kl", tasks) == pytest.approx(0.2096677096373839, abs=1e-12)


def test_insufficient_structure():
    with pytest.raises(ValueError, match="insufficient task structure"):
        fmig.empirical_mig(HA, HB, [0.5, 0.5], "kl", [(0, 0, 0)])


def test_divergences():
    assert fmig.f_divergence([0.5, 0.5], [0.25, 0.75]) == pytest.approx(0.1438, abs=1e-4)
    joint = np.array([[0.4, 0.1], [0.1, 0.4]])
    assert fmig.f_mutual_information(joint, "kl") == pytest.approx(0.8 * math.log(1.6) + 0.2 * math.log(0.4))
    assert set(fmig.builtin_names()) == {"kl", "reverse_kl", "pearson", "squared_hellinger", "tvd"}


def test_prior_and_posteriors():
    prior = fmig.generate_prior(3, 4, 2, seed=1, require_stable=True)
    assert prior["sigma_b"] == 4
    joint = fmig.induce_joint(prior)
    assert joint.shape == (3, 4) and joint.sum() == pytest.approx(1.0)
    ha = fmig.posterior_predictor(prior, "A")
    hb = fmig.posterior_predictor(prior, "B")
    mi = fmig.f_mutual_information(joint, "pearson")
    assert fmig.expected_mig(ha, hb, prior["prior_y"], "pearson", prior) == pytest.approx(mi, abs=1e-10)
    assert fmig.verify_ci_identity(prior) <= 1e-12
    assert fmig.check_stable(prior)["stable"]
    tasks = fmig.sample_tasks(prior, 50, 30, seed=2)
    assert len(tasks) == 50
    assert tasks == fmig.sample_tasks(prior, 50, 30, seed=2)


def test_bad_prior_rejected():
    prior = fmig.generate_prior(2, 2, 2)
    prior["extra"] = 1
    with pytest.raises(ValueError, match="extra"):
        fmig.check_stable(prior)


def test_cotrain_recovers_anchored_prior():
    prior = fmig.anchor_signals(fmig.generate_prior(4, 4, 2, seed=0, require_stable=True), 0.15)
    assert fmig.check_well_defined(prior, 0.05)["verdict"] == "certified-on-grid"
    res = fmig.optimize_mig(prior, "kl", {"restarts": 5})
    mi = fmig.f_mutual_information(fmig.induce_joint(prior), "kl")
    assert res["objective"] == pytest.approx(mi, abs=1e-6)
    assert res["aligned_tv_distance"] <= 0.05
    ps = fmig.optimize_ps_gain(prior, "log", optimizer={"restarts": 5})
    assert ps["objective"] == pytest.approx(fmig.lsr_truth_value(prior), abs=1e-6)


def test_mechanisms():
    rows = [[0.5, 0.0, 0.5], [0.0, 0.5, 0.5]]
    prior = {"sigma_a": 3, "sigma_b": 3, "sigma_y": 2, "prior_y": [0.5, 0.5], "cond_a": rows, "cond_b": rows}
    single = fmig.verify_truthful(prior, "single", grid_resolution=0.1)
    assert single["is_equilibrium"]
    focal = fmig.verify_focal(prior, "kl", 0.1)
    assert focal["truthful_is_max"] and focal["nonpermutation_strictly_below"]
    with pytest.raises(ValueError):
        fmig.verify_truthful(prior, "other")
