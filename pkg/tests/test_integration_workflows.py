"""End-to-end workflows: synthesis, detection, de-noising and scoring."""

import numpy as np
import pytest

from src.cli import main
from src.hwsim import stream_run
from src.metrics import mse
from src.models import Frame, FrameSequence, PipelineConfig, SpeckleParams, Verdict
from src.noise import noise_sequence
from src.pipeline import run_pipeline
from src.services import bench_variances, run_bench


@pytest.mark.integration
class TestZeroActivity:
    """Four identical 512x512 frames are speckle free on every path."""

    @pytest.fixture
    def large_frame(self, test_image):
        return Frame(data=np.tile(test_image.data, (2, 2)))

    def test_pipeline(self, large_frame):
        result = run_pipeline(FrameSequence.of([large_frame] * 4))
        assert result.report.granular_count == 0
        assert result.report.activity_index == 0
        assert result.verdict == Verdict.SPECKLE_FREE

    def test_cli(self, large_frame, write_frames, capsys):
        paths = write_frames([large_frame] * 4)
        assert main(["detect", "--z", "4", *paths]) == 0
        out = capsys.readouterr().out
        assert "granular_count = 0" in out
        assert "image is speckle free" in out


@pytest.mark.integration
class TestDenoisingEfficacy:
    """Forced de-noising of heavily speckled frames improves on the noisy input."""

    def test_ief_above_one(self, test_image):
        iefs = []
        noisy_errors = []
        denoised_errors = []
        for seed in range(10):
            seq = noise_sequence(test_image, SpeckleParams(variance=0.08, seed=seed * 4), 4)
            result = run_pipeline(seq, clean_ref=test_image, force=True)
            iefs.append(result.metrics.ief)
            noisy_errors.append(mse(test_image, seq.frames[0]))
            denoised_errors.append(mse(test_image, result.denoised_frames.frames[0]))
        assert np.mean(iefs) > 1.0
        assert np.mean(denoised_errors) < np.mean(noisy_errors)

    def test_detection_then_denoise(self, small_image):
        seq = noise_sequence(small_image, SpeckleParams(variance=0.08, seed=1), 4)
        cfg = PipelineConfig(activity_threshold=0.0)
        stream_report, _ = stream_run(seq, cfg)
        result = run_pipeline(seq, cfg, clean_ref=small_image)
        assert stream_report == result.report
        assert result.verdict == Verdict.DENOISED
        assert result.metrics.ief > 1.0


@pytest.mark.integration
@pytest.mark.slow
def test_denoised_quality_flatter_than_noisy(test_image):
    _, rows = run_bench(
        test_image,
        PipelineConfig(),
        bench_variances(),
        seeds=10,
        base_seed=0,
        n_frames=4,
    )
    means = [row for row in rows if row["seed"] == "mean"]
    noisy = [row["psnr1"] for row in means]
    denoised = [row["psnr_clean_denoised"] for row in means]
    assert max(denoised) - min(denoised) < max(noisy) - min(noisy)
