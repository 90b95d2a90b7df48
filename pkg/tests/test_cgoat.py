from fractions import Fraction

import numpy as np
import pytest

from goatmix import synthesizers as syn
from goatmix.cgoat import MixtureComposer, allocate_rows, compose, run_cgoat, warm_starts
from goatmix.data import split
from goatmix.datasets import make_two_cluster, shuffle_labels
from goatmix.errors import ConfigError
from goatmix.evaluation import evaluate_synthetic
from goatmix.gbdt import GbdtConfig
from goatmix.rngs import child_seed

from conftest import make_numeric_dataset

CLF = GbdtConfig(n_rounds=30, max_depth=4)


class TestWarmStarts:
    def test_corners_are_basis_vectors(self):
        points = warm_starts([0.8, 0.3, 0.55, 0.9])
        assert len(points) == 5
        for m in range(4):
            assert np.array_equal(points[m], np.eye(4)[m])

    def test_auc_proportional_fifth_point(self):
        # independent hand computation with exact rationals:
        # lifted = (0.3, 0.2, 0.1, 0); fifth = lifted / 0.6
        points = warm_starts([0.9, 0.8, 0.7, 0.6])
        expected = [Fraction(3, 6), Fraction(2, 6), Fraction(1, 6), Fraction(0, 6)]
        assert np.allclose(points[4], [float(f) for f in expected], atol=1e-12)

    def test_equal_aucs_degenerate_to_uniform(self):
        points = warm_starts([0.7, 0.7, 0.7, 0.7])
        assert np.allclose(points[4], 0.25)

    def test_out_of_range_auc_rejected(self):
        with pytest.raises(ConfigError):
            warm_starts([0.5, 1.2, 0.4, 0.3])


class TestAllocateRows:
    def test_exact_fractions(self):
        assert allocate_rows(np.array([0.5, 0.3, 0.2, 0.0]), 1000).tolist() == [500, 300, 200, 0]

    def test_remainder_correction_ties_to_lower_index(self):
        # 2.5 each rounds half-to-even to 2; the two missing rows go to the
        # lowest indices
        assert allocate_rows(np.array([0.25, 0.25, 0.25, 0.25]), 10).tolist() == [3, 3, 2, 2]

    def test_corner_point(self):
        assert allocate_rows(np.array([1.0, 0.0, 0.0, 0.0]), 7).tolist() == [7, 0, 0, 0]

    def test_sums_and_nonnegativity_fuzz(self):
        rng = np.random.default_rng(5)
        for _ in range(300):
            dim = int(rng.integers(2, 7))
            raw = rng.uniform(0, 1, dim)
            alpha = raw / raw.sum() if raw.sum() > 0 else np.full(dim, 1 / dim)
            n = int(rng.integers(0, 500))
            counts = allocate_rows(alpha, n)
            assert counts.sum() == n
            assert (counts >= 0).all()

    def test_invalid_alpha_rejected(self):
        with pytest.raises(ConfigError):
            allocate_rows(np.array([0.5, 0.6]), 10)
        with pytest.raises(ConfigError):
            allocate_rows(np.array([-0.1, 1.1]), 10)


def _fitted_family(train, seed=0):
    return [syn.fit(m, train, seed=child_seed(seed, i)) for i, m in enumerate(syn.METHODS)]


class TestCompose:
    def test_corner_equals_single_member_sample(self):
        train = make_numeric_dataset(n=150, seed=1)
        synths = _fitted_family(train)
        out = compose(synths, np.eye(4)[1], 40, seed=9)
        expected = synths[1].sample(40, seed=child_seed(9, 1))
        assert np.array_equal(out.values, expected.values)

    def test_block_boundaries_in_member_order(self):
        # members are near-copies of datasets with distinct constant columns,
        # so each output row names its source block
        datasets = [make_numeric_dataset(n=60, seed=s) for s in range(4)]
        marked = []
        for i, d in enumerate(datasets):
            values = np.array(d.values)
            values[:, 0] = float(i)
            marked.append(d.with_values(values))
        synths = [
            syn.fit("kde_perturb", d, {"bandwidth_scale": 0.01, "flip_prob": 0.0}, seed=i)
            for i, d in enumerate(marked)
        ]
        out = compose(synths, np.array([0.5, 0.3, 0.2, 0.0]), 1000, seed=3)
        markers = np.round(out.values[:, 0]).astype(int)
        assert out.n == 1000
        assert (markers[:500] == 0).all()
        assert (markers[500:800] == 1).all()
        assert (markers[800:] == 2).all()

    def test_zero_rows(self):
        train = make_numeric_dataset(n=80, seed=2)
        out = compose(_fitted_family(train), np.array([0.25, 0.25, 0.25, 0.25]), 0, seed=1)
        assert out.n == 0
        assert out.schema == train.schema


def _dominance_setup(seed, n=1400, k=20):
    """One near-copy member, three members fitted on label-shuffled data."""
    d = make_two_cluster(n=n, seed=seed, separation=3.2)
    part = split(d, seed=seed)
    shuffled = shuffle_labels(part.train, seed=seed)
    dominant = syn.fit(
        "kde_perturb", part.train, {"bandwidth_scale": 0.01, "flip_prob": 0.0}, seed=seed
    )
    noise = [
        syn.fit(m, shuffled, seed=seed + 1 + i)
        for i, m in enumerate(["gaussian_copula", "joint_mixture", "histogram"])
    ]
    synths = [dominant] + noise
    aucs = [
        evaluate_synthetic(s.sample(part.train.n, seed=seed + 7), part.val, CLF).auc
        for s in synths
    ]
    composer = MixtureComposer(synths, aucs, k=k, patience=15, seed=seed + 100, classifier_config=CLF)
    return part, composer


class TestMixtureComposer:
    def test_dominant_member_takes_the_weight(self):
        part, composer = _dominance_setup(seed=0)
        result = run_cgoat(composer, part)
        assert result.best_alpha[0] >= 0.9
        assert result.best_synthetic.n == part.train.n

    def test_best_loss_bounded_by_warm_starts(self):
        part, composer = _dominance_setup(seed=1, k=6)
        result = run_cgoat(composer, part)
        assert result.best_val_loss <= min(result.warm_start_losses)
        assert result.best_val_loss == result.history.best().loss

    def test_exchangeable_members_match_corner_loss(self):
        # four copies of one fitted model: the mixture cannot beat a corner
        # by more than sampling noise
        d = make_two_cluster(n=1500, seed=3, separation=3.0)
        part = split(d, seed=3)
        base = syn.fit("kde_perturb", part.train, {"bandwidth_scale": 0.01, "flip_prob": 0.0}, seed=4)
        synths = [base, base, base, base]
        aucs = [evaluate_synthetic(base.sample(part.train.n, seed=8), part.val, CLF).auc] * 4
        composer = MixtureComposer(synths, aucs, k=6, patience=15, seed=5, classifier_config=CLF).fit(part)
        for corner_loss in composer.result_.warm_start_losses[:4]:
            assert abs(composer.best_val_loss_ - corner_loss) <= 0.01

    def test_robust_to_injected_noise_member(self):
        # adding a fifth, pure-noise member must not cost more than 0.02
        part, composer4 = _dominance_setup(seed=6, k=10)
        result4 = run_cgoat(composer4, part)
        extra_noise = syn.fit("histogram", shuffle_labels(part.train, seed=99), seed=99)
        synths5 = composer4.synths + [extra_noise]
        aucs5 = composer4.val_aucs + [
            evaluate_synthetic(extra_noise.sample(part.train.n, seed=98), part.val, CLF).auc
        ]
        composer5 = MixtureComposer(synths5, aucs5, k=10, patience=15, seed=106, classifier_config=CLF)
        result5 = run_cgoat(composer5, part)
        assert result5.best_val_loss <= result4.best_val_loss + 0.02

    def test_deterministic_reruns(self):
        part, composer_a = _dominance_setup(seed=7, k=5)
        _, composer_b = _dominance_setup(seed=7, k=5)
        ra = run_cgoat(composer_a, part)
        rb = run_cgoat(composer_b, part)
        assert np.array_equal(ra.best_alpha, rb.best_alpha)
        assert ra.history.to_jsonl() == rb.history.to_jsonl()

    def test_alpha_record_names_members(self):
        part, composer = _dominance_setup(seed=8, k=5)
        result = run_cgoat(composer, part)
        assert list(result.alpha_record()) == [
            "kde_perturb",
            "gaussian_copula",
            "joint_mixture",
            "histogram",
        ]
        assert sum(result.alpha_record().values()) == pytest.approx(1.0, abs=1e-9)

    def test_duplicate_method_names_are_suffixed(self):
        train = make_numeric_dataset(n=120, seed=9)
        s1 = syn.fit("histogram", train, seed=1)
        s2 = syn.fit("histogram", train, seed=2)
        composer = MixtureComposer([s1, s2], [0.6, 0.6], k=2, classifier_config=CLF)
        assert composer.member_names == ("histogram", "histogram#2")

    def test_unfitted_member_rejected(self):
        train = make_numeric_dataset(n=120, seed=10)
        fitted = syn.fit("histogram", train, seed=1)
        bare = syn.make_synthesizer("histogram")
        with pytest.raises(ConfigError):
            MixtureComposer([fitted, bare], [0.5, 0.5], classifier_config=CLF)

    def test_resample_best_draws_fresh_rows(self):
        part, composer = _dominance_setup(seed=11, k=4)
        composer.fit(part)
        fresh = composer.resample_best(200, seed=0)
        assert fresh.n == 200
        assert not np.array_equal(fresh.values[:50], composer.best_synthetic_.values[:50])
