import json
import math

import numpy as np
import pytest

from clickseg.core import miou
from clickseg.guidance import ClickSet
from clickseg.interaction import (
    SamplingConfig,
    boundary_distance,
    correction_click,
    estimate_scale,
    make_reference_segmenter,
    max_boundary_distance_point,
    run_session,
    sample_correction_clicks,
    sample_negative_clicks,
    sample_positive_clicks,
    scale_from_mask,
)


class OracleSegmenter:
    """Returns the ground truth regardless of guidance."""

    def __init__(self, gt):
        self.gt = gt

    def predict(self, image, stack):
        return self.gt.copy()


class ConstantEmptySegmenter:
    def predict(self, image, stack):
        return np.zeros(image.shape[:2], dtype=bool)


def disc_image(size=48, cx=24, cy=24, r=12):
    ys, xs = np.mgrid[0:size, 0:size]
    gt = (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r
    img = np.zeros((size, size, 3), dtype=np.uint8)
    img[:] = (30, 60, 200)
    img[gt] = (220, 40, 40)
    return img, gt


class TestEstimateScale:
    def test_sqrt_pi_times_distance(self):
        est = estimate_scale((0, 0), (10, 0))
        assert est.s == pytest.approx(math.sqrt(math.pi) * 10, rel=1e-12)
        assert est.s == pytest.approx(17.7245, abs=1e-4)

    def test_coincident_clicks_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            estimate_scale((3, 3), (3, 3))

    def test_ground_truth_mode(self):
        gt = np.zeros((10, 10), dtype=bool)
        gt[2:6, 2:6] = True  # 16 px
        est = scale_from_mask(gt)
        assert est.s == pytest.approx(4.0)

    def test_random_pairs(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            a = (int(rng.integers(100)), int(rng.integers(100)))
            b = (int(rng.integers(100)), int(rng.integers(100)))
            if a == b:
                continue
            d = math.hypot(a[0] - b[0], a[1] - b[1])
            assert estimate_scale(a, b).s == pytest.approx(
                math.sqrt(math.pi) * d, rel=1e-9)


class TestSamplePositiveClicks:
    def test_single_pixel_object(self):
        gt = np.zeros((8, 8), dtype=bool)
        gt[3, 4] = True
        cfg = SamplingConfig()
        clicks = sample_positive_clicks(gt, cfg, np.random.default_rng(0))
        assert clicks == [(4, 3)]

    def test_empty_object_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            sample_positive_clicks(np.zeros((8, 8), dtype=bool),
                                   SamplingConfig(), np.random.default_rng(0))

    def test_solid_square_inner_core(self):
        gt = np.zeros((40, 40), dtype=bool)
        gt[0:40, 0:40] = True
        cfg = SamplingConfig(d_in1=(15,), d_in2=(7,))
        rng = np.random.default_rng(1)
        clicks = sample_positive_clicks(gt, cfg, rng)
        dist = boundary_distance(gt)
        for (x, y) in clicks:
            assert gt[y, x]
            assert dist[y, x] >= 15

    def test_clicks_inside_and_spaced(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            gt = np.zeros((30, 30), dtype=bool)
            x0, y0 = int(rng.integers(15)), int(rng.integers(15))
            gt[y0:y0 + 12, x0:x0 + 12] = True
            clicks = sample_positive_clicks(gt, SamplingConfig(), rng)
            for (x, y) in clicks:
                assert gt[y, x]
            # pairwise spacing holds for some (possibly relaxed) distance > 0
            for i, a in enumerate(clicks):
                for b in clicks[i + 1:]:
                    assert math.hypot(a[0] - b[0], a[1] - b[1]) > 0


class TestSampleNegativeClicks:
    def test_strategy2_no_other_instances(self):
        gt = np.zeros((10, 10), dtype=bool)
        gt[2:5, 2:5] = True
        out = sample_negative_clicks(gt, [], 2, SamplingConfig(),
                                     np.random.default_rng(0))
        assert out == []

    def test_strategy1_no_background(self):
        gt = np.ones((8, 8), dtype=bool)
        out = sample_negative_clicks(gt, [], 1, SamplingConfig(),
                                     np.random.default_rng(0))
        assert out == []

    def test_strategy1_outside_dilated_object(self):
        gt = np.zeros((40, 40), dtype=bool)
        gt[15:25, 15:25] = True
        cfg = SamplingConfig(d_out1=(15,), d_out2=(10,))
        clicks = sample_negative_clicks(gt, [], 1, cfg, np.random.default_rng(3))
        fg = [(x, y) for y in range(40) for x in range(40) if gt[y, x]]
        for (x, y) in clicks:
            assert not gt[y, x]
            d = min(math.hypot(x - fx, y - fy) for fx, fy in fg)
            assert d >= 15

    def test_strategy2_clicks_on_each_instance(self):
        gt = np.zeros((30, 30), dtype=bool)
        gt[1:5, 1:5] = True
        other = np.zeros((30, 30), dtype=bool)
        other[20:28, 20:28] = True
        clicks = sample_negative_clicks(gt, [other], 2, SamplingConfig(),
                                        np.random.default_rng(4))
        assert clicks
        for (x, y) in clicks:
            assert other[y, x]

    def test_bad_strategy(self):
        with pytest.raises(ValueError):
            sample_negative_clicks(np.zeros((4, 4), dtype=bool), [], 3,
                                   SamplingConfig(), np.random.default_rng(0))


class TestCorrectionClick:
    def test_missing_square_gets_positive_center(self):
        gt = np.zeros((9, 9), dtype=bool)
        gt[3:6, 3:6] = True
        pred = np.zeros_like(gt)
        (x, y), positive = correction_click(pred, gt)
        assert positive
        assert (x, y) == (4, 4)

    def test_spurious_pixel_gets_negative(self):
        gt = np.zeros((6, 6), dtype=bool)
        gt[1:3, 1:3] = True
        pred = gt.copy()
        pred[5, 5] = True
        (x, y), positive = correction_click(pred, gt)
        assert not positive
        assert (x, y) == (5, 5)

    def test_largest_component_selected(self):
        gt = np.zeros((10, 10), dtype=bool)
        gt[0:3, 0:4] = True   # 12-px error component
        gt[8, 0:5] = True     # 5-px error component
        pred = np.zeros_like(gt)
        (x, y), positive = correction_click(pred, gt)
        assert positive
        assert y <= 2  # landed in the 12-px block

    def test_polarity_matches_error_type(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            gt = rng.random((8, 8)) < 0.4
            pred = rng.random((8, 8)) < 0.4
            if np.array_equal(gt, pred):
                continue
            (x, y), positive = correction_click(pred, gt)
            assert pred[y, x] != gt[y, x]
            assert positive == bool(gt[y, x])

    def test_identical_masks_rejected(self):
        m = np.zeros((4, 4), dtype=bool)
        with pytest.raises(ValueError):
            correction_click(m, m)


class TestSampleCorrectionClicks:
    def test_reproducible_and_bounded(self):
        gt = np.zeros((12, 12), dtype=bool)
        gt[3:9, 3:9] = True
        pred = np.zeros_like(gt)
        cfg = SamplingConfig(n_iter=4, rng_seed=7)
        a = sample_correction_clicks(pred, gt, cfg, np.random.default_rng(7),
                                     ClickSet())
        b = sample_correction_clicks(pred, gt, cfg, np.random.default_rng(7),
                                     ClickSet())
        assert a == b
        assert len(a) <= 4


class TestRunSession:
    def test_oracle_terminates_immediately(self):
        img, gt = disc_image()
        state = run_session(img, gt, OracleSegmenter(gt), iou_target=0.9,
                            zero_click_prediction=False)
        assert state.click_budget_used == 1
        assert state.trace[-1]["miou"] == 1.0

    def test_oracle_zero_click(self):
        img, gt = disc_image()
        state = run_session(img, gt, OracleSegmenter(gt), iou_target=0.9)
        assert state.zero_click_miou == 1.0
        assert state.click_budget_used == 0

    def test_constant_empty_exhausts_budget(self):
        img, gt = disc_image()
        state = run_session(img, gt, ConstantEmptySegmenter(), budget=20,
                            iou_target=0.9)
        assert state.click_budget_used == 20
        assert len(state.trace) == 20

    def test_never_exceeds_budget(self):
        img, gt = disc_image()
        for budget in (1, 5, 20):
            state = run_session(img, gt, ConstantEmptySegmenter(),
                                budget=budget, iou_target=0.99)
            assert state.click_budget_used <= budget

    def test_deterministic_traces(self):
        img, gt = disc_image()
        part = None
        a = run_session(img, gt, ConstantEmptySegmenter(), budget=5,
                        iou_target=0.9)
        b = run_session(img, gt, ConstantEmptySegmenter(), budget=5,
                        iou_target=0.9)
        assert json.dumps(a.trace) == json.dumps(b.trace)

    def test_first_click_at_innermost_point(self):
        img, gt = disc_image(cx=20, cy=30, r=10)
        state = run_session(img, gt, ConstantEmptySegmenter(), budget=1,
                            iou_target=0.9)
        rec = state.trace[0]
        assert rec["polarity"] == "pos"
        assert (rec["x"], rec["y"]) == max_boundary_distance_point(gt)

    def test_reference_segmenter_on_disc(self):
        img, gt = disc_image()
        from clickseg.superpixels import slic
        from clickseg.proposals import generate_proposals
        part = slic(img, 32)
        pset = generate_proposals(img, part)
        seg = make_reference_segmenter(img, part)
        state = run_session(img, gt, seg, budget=5, iou_target=0.9,
                            partition=part, pset=pset)
        best = max([r["miou"] for r in state.trace] + [state.zero_click_miou or 0])
        assert best >= 0.9


class TestReferenceSegmenter:
    def test_no_clicks_empty_mask(self):
        img, gt = disc_image()
        from clickseg.superpixels import slic
        from clickseg.proposals import generate_proposals
        from clickseg.guidance import assemble_stack
        part = slic(img, 16)
        pset = generate_proposals(img, part)
        seg = make_reference_segmenter(img, part)
        stack = assemble_stack(img, part, pset, ClickSet(),
                               allow_scale_fallback=True)
        pred = seg.predict(img, stack)
        assert not pred.any()

    def test_positive_click_forces_superpixel(self):
        img = np.full((16, 16, 3), 100, dtype=np.uint8)
        from clickseg.superpixels import slic
        from clickseg.proposals import generate_proposals
        from clickseg.guidance import assemble_stack
        part = slic(img, 4)
        pset = generate_proposals(img, part)
        seg = make_reference_segmenter(img, part)
        clicks = ClickSet(positives=((2, 2),))
        stack = assemble_stack(img, part, pset, clicks,
                               allow_scale_fallback=True)
        pred = seg.predict(img, stack)
        sp = part.pixel_to_superpixel(2, 2)
        assert pred[part.labels == sp].all()

    def test_two_region_separation(self):
        img, gt = disc_image()
        from clickseg.superpixels import slic
        from clickseg.proposals import generate_proposals
        from clickseg.guidance import assemble_stack
        part = slic(img, 16)
        pset = generate_proposals(img, part)
        seg = make_reference_segmenter(img, part)
        clicks = ClickSet(positives=((24, 24),), negatives=((4, 4),))
        stack = assemble_stack(img, part, pset, clicks,
                               allow_scale_fallback=True)
        pred = seg.predict(img, stack)
        assert miou(pred, gt) > 0.5

    def test_missing_channels_rejected(self):
        img, gt = disc_image()
        from clickseg.superpixels import slic
        from clickseg.proposals import generate_proposals
        from clickseg.core import ChannelKind
        from clickseg.guidance import assemble_stack
        part = slic(img, 16)
        pset = generate_proposals(img, part)
        seg = make_reference_segmenter(img, part)
        stack = assemble_stack(img, part, pset, ClickSet(),
                               layout=(ChannelKind.GAUSSIAN_POS,
                                       ChannelKind.GAUSSIAN_NEG))
        with pytest.raises(ValueError, match="channels"):
            seg.predict(img, stack)
