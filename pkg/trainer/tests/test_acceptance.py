"""Trainer acceptance: parity, loss values, invariance, desk-scale run.

The training-run criteria build a 10-minute synthetic corpus and train for
20 epochs on CPU; expect a few minutes. Run with ``pytest -s`` for one
PASS line per criterion.
"""

import numpy as np
import pytest
import torch

from clearband import Denoiser, Model, NetworkState, load_model, \
    network_forward, process_signal
from clearband.config import HOP_SIZE

from clearband_trainer import (GainNet, TrainingExample, gain_loss,
                               load_corpus, synthesize_corpus, train_model,
                               window_examples)
from clearband_trainer.export import export_tensors
from clearband_trainer.targets import build_example

from conftest import segmental_snr, synth_noise, synth_speech


def _report(name):
    print(f"ACCEPTANCE {name}: PASS")


def _random_feature_frames(n, seed):
    rng = np.random.default_rng(seed)
    scale = np.concatenate([np.full(22, 3.0), np.full(12, 1.0),
                            np.full(6, 1.0), [0.5, 0.3]])
    return (rng.standard_normal((n, 42)) * scale).astype(np.float32)


def test_forward_parity_float_and_int8():
    net = GainNet(seed=50)
    feats = _random_feature_frames(100, seed=51)
    with torch.no_grad():
        tg, tv = net(torch.from_numpy(feats[None]))
    tg, tv = tg[0].numpy(), tv[0].numpy()

    float_model = Model.from_float_tensors(net.export_tensors())
    int8_model = load_model(export_tensors(net.export_tensors()))
    worst_float = worst_int8 = 0.0
    sf, sq = NetworkState(), NetworkState()
    for i, f in enumerate(feats):
        gf, vf = network_forward(float_model, sf, f)
        gq, vq = network_forward(int8_model, sq, f)
        worst_float = max(worst_float, float(np.abs(gf - tg[i]).max()),
                          abs(vf - float(tv[i])))
        worst_int8 = max(worst_int8, float(np.abs(gq - tg[i]).max()),
                         abs(vq - float(tv[i])))
    assert worst_float < 1e-4
    assert worst_int8 < 0.02
    _report(f"trainer/engine parity (float {worst_float:.1e}, "
            f"int8 {worst_int8:.4f})")


def test_gain_loss_hand_values():
    ones = torch.ones(1, dtype=torch.bool)
    assert float(gain_loss(torch.tensor([0.7]), torch.tensor([0.7]),
                           ones)) == 0.0
    assert float(gain_loss(torch.tensor([1.0]), torch.tensor([0.0]),
                           ones)) == pytest.approx(1.0)
    assert float(gain_loss(torch.tensor([0.25]), torch.tensor([1.0]),
                           ones)) == pytest.approx(0.25, abs=1e-7)
    _report("gain loss hand values")


def test_masked_frame_gradient_invariance():
    rng = np.random.default_rng(52)

    def window(frames=50):
        return TrainingExample(
            features=rng.standard_normal((frames, 42)).astype(np.float32),
            gains=rng.uniform(0, 1, (frames, 22)).astype(np.float32),
            mask=rng.uniform(size=(frames, 22)) < 0.8,
            vad=(rng.uniform(size=frames) < 0.5).astype(np.float32))

    windows = [window() for _ in range(4)]
    silent = [TrainingExample(
        features=rng.standard_normal((30, 42)).astype(np.float32),
        gains=np.zeros((30, 22), np.float32),
        mask=np.zeros((30, 22), bool),
        vad=np.zeros(30, np.float32)) for _ in range(2)]

    net_a, _ = train_model(windows, epochs=3, seed=53, batch_size=2,
                           holdout_fraction=0.0, shuffle=False)
    net_b, _ = train_model(windows + silent, epochs=3, seed=53, batch_size=2,
                           holdout_fraction=0.0, shuffle=False)
    for (name, pa), (_, pb) in zip(net_a.named_parameters(),
                                   net_b.named_parameters()):
        assert torch.equal(pa, pb), f"{name} diverged"
    _report("masked-frame gradient invariance (weights bit-identical)")


@pytest.fixture(scope="module")
def toy_corpus(tmp_path_factory, corpus_dirs):
    speech_dir, noise_dir = corpus_dirs
    out = tmp_path_factory.mktemp("toy_data")
    synthesize_corpus(speech_dir, noise_dir, out, hours=10 / 60, seed=0)
    return out


@pytest.fixture(scope="module")
def toy_training(toy_corpus):
    windows = window_examples(load_corpus(toy_corpus))
    net, history = train_model(windows, epochs=20, lr=1e-3, seed=0,
                               batch_size=10)
    return net, history


def test_toy_training_reduces_holdout_loss(toy_training):
    _, history = toy_training
    initial, final = history["holdout"][0], history["holdout"][-1]
    assert np.isfinite(initial) and np.isfinite(final)
    assert final < 0.9 * initial
    _report(f"toy training run (holdout {initial:.4f} -> {final:.4f})")


def test_trained_model_improves_segmental_snr(toy_training):
    net, _ = toy_training
    model = load_model(export_tensors(net.export_tensors()))

    clean = synth_speech(4.0, seed=99)  # held-out seeds
    rng = np.random.default_rng(100)
    noise = rng.standard_normal(len(clean))
    noise *= np.sqrt(np.sum(clean ** 2)
                     / (np.sum(noise ** 2) * 10 ** 0.5))  # 5 dB SNR
    noisy = clean + noise

    out, _, _ = process_signal(Denoiser(model), noisy)
    ref = clean[:len(out) - HOP_SIZE]
    seg_noisy = segmental_snr(ref, noisy[:len(ref)])
    seg_out = segmental_snr(ref, out[HOP_SIZE:])
    assert seg_out - seg_noisy >= 2.0
    _report(f"trained-model denoising (segSNR {seg_noisy:.1f} dB -> "
            f"{seg_out:.1f} dB)")


def test_trained_vad_separates_speech_from_noise(toy_training):
    net, _ = toy_training
    model = load_model(export_tensors(net.export_tensors()))
    _, vad_noise, _ = process_signal(Denoiser(model),
                                     synth_noise(3.0, seed=123) * 0.3)
    _, vad_speech, _ = process_signal(Denoiser(model),
                                      synth_speech(3.0, seed=124))
    assert float(np.mean(vad_speech)) > float(np.mean(vad_noise)) + 0.2
    _report(f"vad separation (noise {np.mean(vad_noise):.2f} vs "
            f"speech {np.mean(vad_speech):.2f})")


def test_feature_parity_with_engine(toy_corpus):
    from clearband import FrameAnalyzer
    speech = synth_speech(1.0, seed=201)
    noise = synth_noise(1.0, seed=202)[:len(speech)] * 0.2
    noisy = speech + noise
    ex = build_example(speech, noisy)
    analyzer = FrameAnalyzer()
    worst = 0.0
    for i in range(len(ex.features)):
        ref = analyzer.push(noisy[i * HOP_SIZE:(i + 1) * HOP_SIZE])
        worst = max(worst, float(np.abs(ex.features[i]
                                        - ref.features).max()))
    assert worst < 1e-5
    _report(f"feature parity (max gap {worst:.1e})")
