"""
Tests for the GSDNet pipeline: encoder, graphs, fusion, head, training and recovery
"""
import logging
import math

import numpy as np
import pytest
import torch

from src.diffusion import DiffusionSchedule, SdeStepPlan
from src.gsdnet import (
    DEGENERATE_WEIGHT,
    PATTERN_NAMES,
    GsdnetModel,
    MissingPattern,
    ModalityEncoder,
    ModelSpec,
    MultimodalSample,
    PredictionHead,
    all_patterns,
    assemble_adjacency,
    bucket_index,
    build_graph,
    draw_pattern,
    edge_allowed,
    encode,
    gcn_forward,
    gcn_propagate,
    load_model,
    normalize_adjacency,
    perturb_spectrum,
    positional_encoding,
    predict,
    predict_complete,
    predict_recovered,
    reconstruction_branch,
    reconstruction_loss,
    recover,
    save_model,
    train_batch,
    train_step,
    training_steps
)
from src.linalg import eigh, subspace_alignment
from src.score import make_optimizer
from src.utils import ConfigError, DataError, NumericalError, ShapeError

SMALL_PLAN = SdeStepPlan(num_steps=5)


def mark_trained(model):
    for m in model.training_counts:
        model.training_counts[m] = 1
    return model


def random_blocks(rng, n=4, d=3, modalities=("t", "a", "v")):
    return {m: rng.standard_normal((n, d)) for m in modalities}


class TestTypes:

    def test_pattern_names_follow_protocol_order(self):
        assert tuple(p.name for p in all_patterns()) == PATTERN_NAMES

    def test_pattern_sets(self):
        pattern = MissingPattern.from_available("tv")
        assert pattern.observed == ("t", "v")
        assert pattern.missing == ("a",)
        assert MissingPattern.complete().missing == ()

    def test_pattern_needs_an_observed_modality(self):
        with pytest.raises(DataError):
            MissingPattern({"t": 0, "a": 0, "v": 0})

    def test_unknown_modality(self):
        with pytest.raises(DataError):
            MissingPattern.from_available("tx")

    def test_sample_utterance_counts_must_agree(self):
        with pytest.raises(ShapeError):
            MultimodalSample({"t": np.zeros((3, 2)), "a": np.zeros((4, 2))}, 0.0)

    def test_restricted_sample(self, sample):
        masked = sample.restricted_to(["a"])
        assert masked.present == ("a",)
        assert masked.label == sample.label


class TestEncoder:

    def test_positional_encoding_values(self):
        pe = positional_encoding(2, 4)
        assert float(pe[1, 0]) == pytest.approx(0.841471, abs=1e-6)
        assert float(pe[1, 2]) == pytest.approx(math.sin(0.01), abs=1e-15)
        assert float(pe[1, 3]) == pytest.approx(math.cos(0.01), abs=1e-15)
        assert pe[0].tolist() == [0.0, 1.0, 0.0, 1.0]

    def test_identity_conv_adds_positions(self, rng):
        encoder = ModalityEncoder({"t": 4}, 4, {"t": 1})
        with torch.no_grad():
            encoder.convs["t"].weight.copy_(torch.eye(4, dtype=torch.float64).unsqueeze(-1))
            encoder.convs["t"].bias.zero_()

        zero = encoder.encode_block("t", torch.zeros(5, 4, dtype=torch.float64))
        assert torch.equal(zero, positional_encoding(5, 4))

        x = torch.as_tensor(rng.standard_normal((5, 4)))
        torch.testing.assert_close(encoder.encode_block("t", x), x + positional_encoding(5, 4))

    def test_same_padding_keeps_length(self, model, sample):
        encoded = encode(sample, model.encoder)
        assert encoded.present == ("t", "a", "v")
        assert all(block.shape == (4, 4) for block in encoded.blocks.values())

    def test_missing_modalities_are_skipped(self, model, sample):
        assert encode(sample.restricted_to("tv"), model.encoder).present == ("t", "v")

    def test_wrong_raw_width(self, model):
        with pytest.raises(ShapeError):
            model.encoder.encode_block("a", torch.zeros(4, 5, dtype=torch.float64))


class TestGraph:

    @pytest.mark.parametrize("args, expected", [
        ((0, 1, 0, 2, 1), True),
        ((0, 1, 0, 3, 1), False),
        ((0, 1, 0, 1, 1), False),
        ((0, 2, 1, 2, 1), True),
        ((0, 2, 1, 3, 1), False),
    ])
    def test_edge_rule(self, args, expected):
        assert edge_allowed(*args) is expected

    def test_single_node(self):
        graph = build_graph({"t": np.ones((1, 3))})
        assert graph.adjacency.entries.tolist() == [[0.0]]
        assert graph.spectrum.eigvals.tolist() == [0.0]

    def test_identical_neighbours(self):
        graph = build_graph({"t": np.array([[1.0, 2.0], [1.0, 2.0]])}, window=1)
        np.testing.assert_allclose(graph.adjacency.entries, [[0.0, 1.0], [1.0, 0.0]], atol=1e-15)
        np.testing.assert_allclose(graph.spectrum.eigvals, [-1.0, 1.0], atol=1e-14)

    def test_matches_brute_force_rule(self, rng):
        blocks = random_blocks(rng, n=4, d=3)
        graph = build_graph(blocks, window=1)
        order = ("t", "a", "v")
        nodes = [(slot, utt, blocks[m][utt]) for slot, m in enumerate(order) for utt in range(4)]

        expected = np.zeros((12, 12))
        for i, (si, ui, fi) in enumerate(nodes):
            for j, (sj, uj, fj) in enumerate(nodes):
                if edge_allowed(si, ui, sj, uj, 1):
                    cosine = fi @ fj / (np.linalg.norm(fi) * np.linalg.norm(fj))
                    expected[i, j] = min(max(cosine, 0.0), 1.0)

        np.testing.assert_allclose(graph.adjacency.entries, expected, atol=1e-12)
        assert not graph.degenerate

    def test_block_spectra(self, rng):
        graph = build_graph(random_blocks(rng), window=2)
        for m in ("t", "a", "v"):
            rows = graph.block_slice(m)
            block = graph.adjacency.entries[rows, rows]
            np.testing.assert_allclose(graph.block_spectra[m].eigvals, eigh(block).eigvals, atol=1e-12)

    def test_degenerate_features(self, caplog):
        with caplog.at_level(logging.WARNING, logger="gsdnet"):
            graph = build_graph({"t": np.zeros((3, 2)), "v": np.zeros((3, 2))}, window=1)
        assert graph.degenerate
        assert np.all(np.isfinite(graph.adjacency.entries))
        assert set(np.unique(graph.adjacency.entries)) == {0.0, DEGENERATE_WEIGHT}
        assert any("All-zero" in record.message for record in caplog.records)

    def test_assemble_without_recovered_spectra_is_similarity_graph(self, rng):
        blocks = random_blocks(rng)
        graph = build_graph(blocks, window=2)
        np.testing.assert_allclose(assemble_adjacency(blocks, window=2).numpy(), graph.adjacency.entries,
                                   atol=1e-12)

    def test_assemble_uses_recovered_spectrum_in_its_block(self, rng):
        blocks = random_blocks(rng)
        graph = build_graph(blocks, window=2)
        lam = torch.tensor(graph.block_spectra["a"].eigvals, dtype=torch.float64)
        assembled = assemble_adjacency(blocks, {"a": lam}, window=2).numpy()

        # The similarity block's own spectrum rebuilds it up to clipping and diagonal
        np.testing.assert_allclose(assembled, graph.adjacency.entries, atol=1e-10)
        assert np.array_equal(assembled, assembled.T)
        assert np.all(np.diag(assembled) == 0)

    def test_assemble_passes_gradients_to_eigenvalues(self, rng):
        blocks = random_blocks(rng)
        lam = torch.tensor([0.5, 0.8, 1.1, 1.4], dtype=torch.float64, requires_grad=True)
        assemble_adjacency(blocks, {"v": lam}, window=2).sum().backward()
        assert lam.grad is not None
        assert float(lam.grad.abs().sum()) > 0

    def test_assemble_checks_spectrum_length(self, rng):
        with pytest.raises(ShapeError):
            assemble_adjacency(random_blocks(rng), {"t": torch.zeros(3, dtype=torch.float64)})

    @pytest.mark.parametrize("t", [0.1, 0.5, 0.9])
    def test_spectral_noising_keeps_the_basis(self, rng, t):
        graph = build_graph(random_blocks(rng), window=2)
        noised = perturb_spectrum(graph.spectrum, DiffusionSchedule(), t, rng.standard_normal(12))

        assert noised.eigvecs is graph.spectrum.eigvecs
        redecomposed = eigh(noised.reconstruct())
        assert subspace_alignment(graph.spectrum.eigvecs, redecomposed.eigvecs) >= 1 - 1e-6


class TestFusion:

    def test_identity_propagation(self, rng):
        h = torch.as_tensor(np.abs(rng.standard_normal((3, 2))))
        out = gcn_propagate(h, torch.zeros(3, 3, dtype=torch.float64), [torch.eye(2, dtype=torch.float64)])
        assert torch.equal(out, h)

    def test_two_node_hand_computation(self):
        adjacency = torch.tensor([[0.0, 1.0], [1.0, 0.0]], dtype=torch.float64)
        h = torch.tensor([[1.0, -2.0], [3.0, 0.5]], dtype=torch.float64)
        w = torch.tensor([[1.0, 0.0], [-1.0, 2.0]], dtype=torch.float64)
        # A + I is all ones with degree 2, so A_hat = 0.5 everywhere
        out = gcn_propagate(h, adjacency, [w])
        torch.testing.assert_close(out, torch.tensor([[2.75, 0.0], [2.75, 0.0]], dtype=torch.float64))
        torch.testing.assert_close(gcn_forward(h, adjacency, [w]), torch.tensor([2.75, 0.0], dtype=torch.float64))

    def test_zero_weights(self, rng):
        h = torch.as_tensor(rng.standard_normal((4, 3)))
        out = gcn_forward(h, torch.ones(4, 4, dtype=torch.float64), [torch.zeros(3, 3, dtype=torch.float64)])
        assert torch.count_nonzero(out) == 0

    def test_normalization_rejects_negative_degree(self):
        with pytest.raises(NumericalError):
            normalize_adjacency(torch.tensor([[0.0, -5.0], [-5.0, 0.0]], dtype=torch.float64))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            gcn_propagate(torch.zeros(3, 2, dtype=torch.float64), torch.zeros(4, 4, dtype=torch.float64),
                          [torch.eye(2, dtype=torch.float64)])


class TestHead:

    @pytest.mark.parametrize("score, bucket", [(2.4, 6), (3.0, 6), (9.0, 6), (-3.0, 0), (-10.0, 0), (0.0, 3)])
    def test_bucket_index(self, score, bucket):
        assert bucket_index(score) == bucket

    def test_bucket_matches_edge_formula(self):
        edges = [-3.0 + k * 6.0 / 7.0 for k in range(8)]
        for score in np.linspace(-2.99, 2.99, 101):
            k = bucket_index(score)
            assert edges[k] <= score < edges[k + 1]

    def test_zero_head(self):
        head = PredictionHead(4)
        with torch.no_grad():
            head.linear.weight.zero_()
            head.linear.bias.zero_()
        prediction = predict(torch.ones(4, dtype=torch.float64), head)
        assert prediction.score == 0.0
        assert prediction.binary == 0


class TestModel:

    def test_components(self, model):
        assert set(model.feature_nets) == {"t", "a", "v"}
        assert set(model.spectrum_nets) == {"t", "a", "v"}
        assert model.feature_nets["t"].cond_dim == 3 * (4 + 1)
        assert model.spectrum_nets["t"].input_dim == 4
        assert model.spectrum_nets["t"].cond_dim == 3 * (4 + 4 + 1)

    def test_features_only_variant(self, make_spec):
        model = GsdnetModel(make_spec(spectral_diffusion=False))
        assert len(model.spectrum_nets) == 0
        assert len(model.spectrum_decoders) == 0

    def test_conditions(self, model, sample):
        encoded = encode(sample, model.encoder)
        graph = build_graph(encoded.detached(), window=model.window)
        assert model.feature_condition(encoded, ("t", "v")).shape == (4, 15)
        assert model.spectrum_condition(graph.block_spectra, encoded, ("t",)).shape == (27,)

    def test_feature_condition_slots(self, model, sample):
        encoded = encode(sample, model.encoder).detached()
        cond = model.feature_condition(encoded, ("t", "v"))
        assert torch.equal(cond[:, 0:4], encoded.blocks["t"])
        assert torch.count_nonzero(cond[:, 4:8]) == 0
        assert torch.equal(cond[:, 8:12], encoded.blocks["v"])
        assert cond[:, 12:].tolist() == [[1.0, 0.0, 1.0]] * 4

    def test_spectrum_condition_slots(self, model, sample):
        encoded = encode(sample, model.encoder).detached()
        graph = build_graph(encoded, window=model.window)
        cond = model.spectrum_condition(graph.block_spectra, encoded, ("a",))
        assert torch.count_nonzero(cond[0:4]) == 0
        np.testing.assert_array_equal(cond[4:8].numpy(), graph.block_spectra["a"].eigvals)
        assert torch.count_nonzero(cond[12:16]) == 0
        torch.testing.assert_close(cond[16:20], encoded.blocks["a"].mean(dim=0))
        assert cond[24:].tolist() == [0.0, 1.0, 0.0]

    def test_conditions_need_an_observed_modality(self, model, sample):
        encoded = encode(sample, model.encoder).detached()
        with pytest.raises(ShapeError):
            model.feature_condition(encoded, ())
        with pytest.raises(ShapeError):
            model.spectrum_condition({}, encoded, ())

    def test_feature_decoder_has_linear_skip(self, model):
        decoder = model.feature_decoders["t"]
        decoder.zero_output_()
        x = torch.ones(2, 4, dtype=torch.float64)
        with torch.no_grad():
            torch.testing.assert_close(decoder(x), decoder.skip(x))

    @pytest.mark.parametrize("overrides", [{"beta": -1.0}, {"raw_dims": {"t": 4, "a": 3}}, {"n_utterances": 0}])
    def test_invalid_spec(self, make_spec, overrides):
        with pytest.raises(ConfigError):
            GsdnetModel(make_spec(**overrides))

    def test_same_seed_same_weights(self, make_spec):
        a, b = GsdnetModel(make_spec()), GsdnetModel(make_spec())
        for (name, pa), pb in zip(a.state_dict().items(), b.state_dict().values()):
            assert torch.equal(pa, pb), name


class TestTraining:

    def test_beta_zero_total_is_prediction_loss(self, make_spec, sample, generator):
        model = GsdnetModel(make_spec(beta=0.0))
        losses = train_step(model, make_optimizer(model.parameters()), sample,
                            MissingPattern.from_available("t"), generator, reverse_steps=2)
        assert losses.rec > 0
        assert losses.total == losses.pred

    def test_total_is_weighted_component_sum(self, model, sample, generator):
        losses = train_step(model, make_optimizer(model.parameters()), sample,
                            MissingPattern.from_available("a"), generator, reverse_steps=2)
        expected = model.beta * ((losses.rec + losses.s_theta) + losses.s_phi) + losses.pred
        assert losses.total == expected
        assert losses.s_theta > 0 and losses.s_phi > 0

    def test_complete_pattern_has_only_prediction_loss(self, model, sample, generator):
        losses = train_step(model, make_optimizer(model.parameters()), sample,
                            MissingPattern.complete(), generator)
        assert losses.s_theta == losses.s_phi == losses.rec == 0.0
        assert losses.total == losses.pred
        assert model.training_counts == {"t": 0, "a": 0, "v": 0}

    def test_counts_follow_targets(self, model, sample, generator):
        optimizer = make_optimizer(model.parameters())
        train_step(model, optimizer, sample, MissingPattern.from_available("t"), generator, reverse_steps=1)
        assert model.training_counts == {"t": 0, "a": 1, "v": 1}

    def test_features_only_has_no_spectrum_loss(self, make_spec, sample, generator):
        model = GsdnetModel(make_spec(spectral_diffusion=False))
        losses = train_step(model, make_optimizer(model.parameters()), sample,
                            MissingPattern.from_available("tv"), generator, reverse_steps=1)
        assert losses.s_phi == 0.0
        assert losses.s_theta > 0

    def test_step_updates_parameters(self, model, sample, generator):
        before = {name: p.detach().clone() for name, p in model.named_parameters()}
        train_step(model, make_optimizer(model.parameters()), sample,
                   MissingPattern.from_available("ta"), generator, reverse_steps=2)
        changed = [name for name, p in model.named_parameters() if not torch.equal(p, before[name])]
        assert any(name.startswith("feature_nets.v") for name in changed)
        assert any(name.startswith("head") for name in changed)

    def test_missing_ground_truth(self, model, sample, generator):
        with pytest.raises(DataError):
            train_step(model, make_optimizer(model.parameters()), sample.restricted_to("tv"),
                       MissingPattern.from_available("t"), generator)

    def test_non_finite_loss_aborts(self, model, sample, generator):
        broken = MultimodalSample(dict(sample.modalities), float("nan"), sample.sample_id)
        with pytest.raises(NumericalError):
            train_step(model, make_optimizer(model.parameters()), broken, MissingPattern.complete(), generator)

    def test_reconstruction_at_t_eps_without_noise(self, model, sample, generator):
        encoded = encode(sample, model.encoder).detached()
        graph = build_graph(encoded, window=model.window)
        lam0 = torch.tensor(graph.block_spectra["v"].eigvals, dtype=torch.float64)
        cond = model.spectrum_condition(graph.block_spectra, encoded, ("t", "a"))

        lam_rec = reconstruction_branch(model, "spectrum", "v", lam0, cond, model.t_eps,
                                        torch.zeros_like(lam0), generator, steps=0)
        with torch.no_grad():
            loss = reconstruction_loss(model.spectrum_decoders["v"](lam_rec), lam0)
        assert float(loss) <= 1e-6

    def test_batch_of_copies_matches_single_step(self, make_spec, sample):
        batched, single = GsdnetModel(make_spec()), GsdnetModel(make_spec())
        pattern = MissingPattern.complete()
        a = train_batch(batched, make_optimizer(batched.parameters()), [(sample, pattern)] * 2,
                        torch.Generator().manual_seed(0))
        b = train_step(single, make_optimizer(single.parameters()), sample, pattern,
                       torch.Generator().manual_seed(0))
        assert a.pred == b.pred
        assert a.pattern == "tav,tav"
        for pa, pb in zip(batched.parameters(), single.parameters()):
            assert torch.equal(pa, pb)

    def test_batch_counts_every_target(self, model, sample, generator):
        batch = [(sample, MissingPattern.from_available("t")), (sample, MissingPattern.from_available("ta"))]
        losses = train_batch(model, make_optimizer(model.parameters()), batch, generator, reverse_steps=1)
        assert model.training_counts == {"t": 0, "a": 1, "v": 2}
        assert losses.total == model.beta * ((losses.rec + losses.s_theta) + losses.s_phi) + losses.pred

    def test_invalid_batches(self, model, sample, generator):
        optimizer = make_optimizer(model.parameters())
        with pytest.raises(DataError):
            train_batch(model, optimizer, [], generator)
        with pytest.raises(ValueError):
            train_batch(model, optimizer, [(sample, MissingPattern.from_available("t"))], generator, dsm_draws=0)

    def test_training_steps_draw_batches(self, model, tiny_dataset):
        optimizer = make_optimizer(model.parameters())
        steps = list(training_steps(model, optimizer, tiny_dataset["train"], torch.Generator().manual_seed(2),
                                    0, 2, reverse_steps=1, batch_size=3, dsm_draws=2))
        assert [len(losses.pattern.split(",")) for _, losses in steps] == [3, 3]
        with pytest.raises(ValueError):
            next(training_steps(model, optimizer, tiny_dataset["train"], torch.Generator(), 0, 1, batch_size=0))

    def test_draw_pattern_covers_all_patterns(self, generator):
        names = {draw_pattern(generator).name for _ in range(200)}
        assert names == set(PATTERN_NAMES)

    def test_training_is_deterministic(self, make_spec, tiny_dataset):
        runs = []
        for _ in range(2):
            model = GsdnetModel(make_spec())
            optimizer = make_optimizer(model.parameters())
            steps = list(training_steps(model, optimizer, tiny_dataset["train"],
                                        torch.Generator().manual_seed(5), 0, 3, reverse_steps=2))
            runs.append((steps, model))

        (steps_a, model_a), (steps_b, model_b) = runs
        assert [s for s, _ in steps_a] == [1, 2, 3]
        assert [l.to_dict() for _, l in steps_a] == [l.to_dict() for _, l in steps_b]
        for pa, pb in zip(model_a.parameters(), model_b.parameters()):
            assert torch.equal(pa, pb)

    def test_empty_training_split(self, model, generator):
        with pytest.raises(DataError):
            next(training_steps(model, make_optimizer(model.parameters()), [], generator, 0, 1))


class TestRecovery:

    def test_nothing_missing_passes_through(self, model, sample, generator):
        result = recover(model, sample, MissingPattern.complete(), SMALL_PLAN, generator)
        encoded = encode(sample, model.encoder)
        for m in ("t", "a", "v"):
            assert torch.equal(result.encoded.blocks[m], encoded.blocks[m].detach())
        assert result.decoded == {}
        np.testing.assert_array_equal(result.adjacency.entries,
                                      build_graph(encoded.detached(), window=model.window).adjacency.entries)

    def test_untrained_target(self, model, sample, generator):
        with pytest.raises(NumericalError):
            recover(model, sample.restricted_to("t"), MissingPattern.from_available("t"), SMALL_PLAN, generator)

    def test_observed_modality_absent(self, model, sample, generator):
        mark_trained(model)
        with pytest.raises(DataError):
            recover(model, sample.restricted_to("t"), MissingPattern.from_available("ta"), SMALL_PLAN, generator)

    def test_shapes_and_symmetry(self, model, sample, generator):
        mark_trained(model)
        result = recover(model, sample.restricted_to("t"), MissingPattern.from_available("t"), SMALL_PLAN, generator)

        assert result.recovered == ("a", "v")
        assert result.encoded.present == ("t", "a", "v")
        assert result.decoded["a"].shape == (4, 3)
        assert result.decoded["v"].shape == (4, 2)
        assert result.block_spectra["a"].shape == (4,)

        a = result.adjacency.entries
        assert a.shape == (12, 12)
        assert np.max(np.abs(a - a.T)) <= 1e-10
        assert np.all(a >= 0)
        rebuilt = result.spectrum.reconstruct().entries
        assert np.linalg.norm(rebuilt - a) <= 1e-8 * max(np.linalg.norm(a), 1.0)

        prediction = predict_recovered(model, result)
        assert math.isfinite(prediction.score)

    def test_zero_score_nets_ignore_the_condition(self, model, tiny_dataset):
        mark_trained(model)
        pattern = MissingPattern.from_available("t")
        first, second = tiny_dataset["train"][0], tiny_dataset["train"][1]
        a = recover(model, first, pattern, SMALL_PLAN, torch.Generator().manual_seed(0))
        b = recover(model, second, pattern, SMALL_PLAN, torch.Generator().manual_seed(0))
        assert np.array_equal(a.decoded["a"], b.decoded["a"])

    def test_trained_score_nets_follow_the_condition(self, model, tiny_dataset):
        mark_trained(model)
        with torch.no_grad():
            for net in model.feature_nets.values():
                net.layers[-1].weight.fill_(0.05)
        pattern = MissingPattern.from_available("t")
        first, second = tiny_dataset["train"][0], tiny_dataset["train"][1]
        a = recover(model, first, pattern, SMALL_PLAN, torch.Generator().manual_seed(0))
        b = recover(model, second, pattern, SMALL_PLAN, torch.Generator().manual_seed(0))
        assert not np.array_equal(a.decoded["a"], b.decoded["a"])

    def test_recovery_is_deterministic(self, model, sample):
        mark_trained(model)
        pattern = MissingPattern.from_available("av")
        runs = [recover(model, sample, pattern, SMALL_PLAN, torch.Generator().manual_seed(3)) for _ in range(2)]
        assert runs[0].decoded["t"].tobytes() == runs[1].decoded["t"].tobytes()
        assert runs[0].adjacency.entries.tobytes() == runs[1].adjacency.entries.tobytes()

    def test_averaged_draws(self, model, sample):
        mark_trained(model)
        with torch.no_grad():
            for net in model.feature_nets.values():
                net.layers[-1].weight.fill_(0.05)
        pattern = MissingPattern.from_available("tv")
        runs = [recover(model, sample, pattern, SMALL_PLAN, torch.Generator().manual_seed(4), draws=3)
                for _ in range(2)]
        assert runs[0].decoded["a"].shape == (4, 3)
        assert runs[0].block_spectra["a"].shape == (4,)
        assert runs[0].decoded["a"].tobytes() == runs[1].decoded["a"].tobytes()
        single = recover(model, sample, pattern, SMALL_PLAN, torch.Generator().manual_seed(4))
        assert not np.array_equal(single.decoded["a"], runs[0].decoded["a"])

    def test_draws_must_be_positive(self, model, sample, generator):
        mark_trained(model)
        with pytest.raises(ValueError):
            recover(model, sample, MissingPattern.from_available("tv"), SMALL_PLAN, generator, draws=0)

    def test_predict_complete(self, model, sample):
        assert math.isfinite(predict_complete(model, sample).score)


class TestCheckpoint:

    def test_round_trip(self, model, sample, generator, tmp_path):
        train_step(model, make_optimizer(model.parameters()), sample,
                   MissingPattern.from_available("tv"), generator, reverse_steps=1)
        path = save_model(model, tmp_path / "model.pt", dataset_hash="abc", training_state={"step": 1})

        loaded, payload = load_model(path)
        assert payload["manifest"]["dataset_hash"] == "abc"
        assert payload["training_state"] == {"step": 1}
        assert loaded.training_counts == model.training_counts
        assert loaded.spec == model.spec
        for (name, a), b in zip(model.state_dict().items(), loaded.state_dict().values()):
            assert torch.equal(a, b), name

        pattern = MissingPattern.from_available("tv")
        a = recover(model, sample, pattern, SMALL_PLAN, torch.Generator().manual_seed(1))
        b = recover(loaded, sample, pattern, SMALL_PLAN, torch.Generator().manual_seed(1))
        assert np.array_equal(a.decoded["a"], b.decoded["a"])

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_model(tmp_path / "absent.pt")

    def test_wrong_kind(self, tmp_path):
        torch.save({"kind": "score_net", "format_version": 1}, tmp_path / "net.pt")
        with pytest.raises(ConfigError):
            load_model(tmp_path / "net.pt")


END_TO_END_DIMS = {"t": 6, "a": 5, "v": 4}
END_TO_END_SEEDS = (0, 1, 2)
SINGLE_MISSING = ("ta", "tv", "av")


def train_end_to_end(seed):
    """A small pointwise-encoder model trained on seeded synthetic conversations"""
    from src.harness import SyntheticConfig, generate

    dataset = generate(SyntheticConfig(seed=seed, n_conversations=600, n_utterances=4,
                                       raw_dims=dict(END_TO_END_DIMS), noise=0.1, label_noise=0.1))
    model = GsdnetModel(ModelSpec(raw_dims=dict(END_TO_END_DIMS), n_utterances=4, common_dim=8,
                                  kernel_sizes={"t": 1, "a": 1, "v": 1}, hidden_dims=[64, 64],
                                  decoder_hidden=32, beta=1.0, window=1, seed=seed))
    optimizer = make_optimizer(model.parameters())
    for _ in training_steps(model, optimizer, dataset["train"], torch.Generator().manual_seed(seed), 0, 4000,
                            batch_size=4, dsm_draws=16):
        pass
    return dataset, model


@pytest.fixture(scope="module")
def end_to_end_runs():
    return [train_end_to_end(seed) for seed in END_TO_END_SEEDS]


@pytest.fixture(scope="module")
def single_missing_results(end_to_end_runs):
    """Per seed and pattern: recovered MSE, mean-imputed MSE and both ACC2 values"""
    from src.harness import MeanImputer, acc2

    plan = SdeStepPlan(num_steps=100)
    results = []
    for seed, (dataset, model) in zip(END_TO_END_SEEDS, end_to_end_runs):
        imputer = MeanImputer().fit(dataset["train"])
        generator = torch.Generator().manual_seed(seed)
        for available in SINGLE_MISSING:
            pattern = MissingPattern.from_available(available)
            (target,) = pattern.missing
            recovered_mse, baseline_mse, recovered_scores, baseline_scores, labels = [], [], [], [], []
            for s in dataset["test"]:
                observed = s.restricted_to(available)
                result = recover(model, observed, pattern, plan, generator, draws=4)
                filled = imputer.impute(observed, pattern)
                recovered_mse.append(np.mean((result.decoded[target] - s.modalities[target]) ** 2))
                baseline_mse.append(np.mean((filled.modalities[target] - s.modalities[target]) ** 2))
                recovered_scores.append(predict_recovered(model, result).score)
                baseline_scores.append(predict_complete(model, filled).score)
                labels.append(s.label)
            results.append({
                "seed": seed, "pattern": available,
                "recovered_mse": float(np.mean(recovered_mse)), "baseline_mse": float(np.mean(baseline_mse)),
                "recovered_acc2": acc2(recovered_scores, labels), "baseline_acc2": acc2(baseline_scores, labels),
            })
    return results


@pytest.mark.slow
@pytest.mark.parametrize("available", SINGLE_MISSING)
def test_recovery_beats_mean_imputation(single_missing_results, available):
    rows = [r for r in single_missing_results if r["pattern"] == available]
    assert len(rows) == len(END_TO_END_SEEDS)
    recovered = np.mean([r["recovered_mse"] for r in rows])
    baseline = np.mean([r["baseline_mse"] for r in rows])
    assert recovered <= 0.5 * baseline


@pytest.mark.slow
def test_recovery_lifts_binary_accuracy(single_missing_results):
    recovered = np.mean([r["recovered_acc2"] for r in single_missing_results])
    baseline = np.mean([r["baseline_acc2"] for r in single_missing_results])
    assert recovered >= baseline + 0.02


@pytest.mark.slow
def test_binary_accuracy_falls_with_missing_rate(end_to_end_runs):
    from src.harness import RANDOM_RATE, apply_missing, evaluate

    rates = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7]
    plan = SdeStepPlan(num_steps=50)
    curve = np.zeros(len(rates))
    for seed, (dataset, model) in zip(END_TO_END_SEEDS, end_to_end_runs):
        for k, rate in enumerate(rates):
            masked = apply_missing(dataset["test"], RANDOM_RATE, rate, seed=seed)
            row = evaluate(model, masked, plan, torch.Generator().manual_seed(seed), draws=4)
            curve[k] += row.acc2 / len(END_TO_END_SEEDS)

    # Masks drawn with one seed nest across rates
    assert np.all(np.diff(curve) <= 0.02), curve
    assert curve[-1] < curve[0], curve
