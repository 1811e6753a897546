import numpy as np
import pytest

from seedmine import formats
from seedmine.errors import ParameterError
from seedmine.synth import (
    DISC,
    RECT,
    SceneObject,
    SceneSpec,
    generate,
    make_corpus,
    make_feature_dataset,
    random_scene,
)


def small_spec(seed=0):
    return SceneSpec(
        height=32,
        width=32,
        class_count=3,
        objects=[
            SceneObject(1, DISC, (14, 14, 6), salient=True),
            SceneObject(2, RECT, (2, 24, 8, 30), salient=False),
        ],
        seed=seed,
    )


class TestGenerate:
    def test_deterministic(self):
        a, b = generate(small_spec()), generate(small_spec())
        assert np.array_equal(a.gt, b.gt)
        assert np.array_equal(a.saliency, b.saliency)
        assert np.array_equal(a.cam.values, b.cam.values)
        assert np.array_equal(a.oacam.values, b.oacam.values)
        assert np.array_equal(a.prediction, b.prediction)

    def test_ground_truth_marks_all_objects(self):
        sample = generate(small_spec())
        assert (sample.gt == 1).sum() > 0
        assert (sample.gt == 2).sum() == 36

    def test_prediction_covers_only_salient_objects(self):
        sample = generate(small_spec())
        assert (sample.prediction == 2).sum() == 0
        assert np.array_equal(sample.prediction == 1, sample.gt == 1)

    def test_saliency_covers_salient_disc(self):
        sample = generate(small_spec())
        inside = sample.gt == 1
        # interior of the disc is fully salient; threshold region stays inside
        assert (sample.saliency[inside].mean()) > 0.8
        assert ((sample.saliency > 0.5) & ~inside).sum() == 0

    def test_non_salient_object_disjoint_from_salient_region(self):
        sample = generate(small_spec())
        assert not ((sample.saliency >= 0.5) & (sample.gt == 2)).any()

    def test_offsite_activation_exceeds_background_threshold(self):
        sample = generate(small_spec())
        plane = sample.cam.plane(2)
        assert (plane[sample.gt == 2] > 0.3).all()

    def test_enlarged_map_dominates(self):
        sample = generate(small_spec())
        assert (sample.oacam.values >= sample.cam.values).all()

    def test_record_lists_all_classes(self):
        assert generate(small_spec()).record.present_classes == (1, 2)

    def test_values_stay_in_unit_interval(self):
        sample = generate(small_spec())
        for arr in (sample.cam.values, sample.oacam.values, sample.saliency):
            assert arr.min() >= 0.0 and arr.max() <= 1.0


class TestSpecValidation:
    def test_rejects_no_salient(self):
        with pytest.raises(ParameterError, match="salient"):
            SceneSpec(32, 32, 2, [SceneObject(1, DISC, (10, 10, 3), False)], seed=0)

    def test_rejects_out_of_bounds(self):
        with pytest.raises(ParameterError, match="outside"):
            SceneSpec(32, 32, 2, [SceneObject(1, DISC, (2, 2, 6), True)], seed=0)

    def test_rejects_offsite_not_below_peak(self):
        with pytest.raises(ParameterError, match="cam_offsite"):
            SceneSpec(
                32, 32, 2,
                [SceneObject(1, DISC, (10, 10, 3), True)],
                seed=0, cam_peak=0.5, cam_offsite=0.5,
            )

    def test_rejects_bad_class(self):
        with pytest.raises(ParameterError, match="class id"):
            SceneSpec(32, 32, 1, [SceneObject(4, DISC, (10, 10, 3), True)], seed=0)


class TestRandomScene:
    def test_simple_has_one_salient_object(self):
        rng = np.random.default_rng(0)
        spec = random_scene(rng, height=64, width=64, class_count=6, complex_image=False)
        assert len(spec.objects) == 1
        assert spec.objects[0].salient

    def test_complex_has_non_salient_and_two_classes(self):
        for seed in range(10):
            rng = np.random.default_rng(seed)
            spec = random_scene(rng, height=64, width=64, class_count=6, complex_image=True)
            classes = {o.class_id for o in spec.objects}
            assert len(classes) >= 2
            assert any(not o.salient for o in spec.objects)
            # a non-salient object's class never also appears salient
            salient_classes = {o.class_id for o in spec.objects if o.salient}
            non_salient_classes = {o.class_id for o in spec.objects if not o.salient}
            assert not salient_classes & non_salient_classes


class TestMakeCorpus:
    def test_single_simple_image(self, tmp_path):
        records = make_corpus(tmp_path, count=1, mix=0.0, seed=3)
        assert len(records) == 1
        assert records[0].is_simple
        for suffix in (".gt.pgm", ".sal.pgm", ".cam.fmap", ".oacam.fmap", ".pred.pgm"):
            assert (tmp_path / f"img0000{suffix}").exists()

    def test_mix_rounding_is_floor(self, tmp_path):
        records = make_corpus(tmp_path, count=7, mix=0.5, seed=3)
        assert sum(1 for r in records if not r.is_simple) == 3

    def test_regeneration_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        make_corpus(a, count=4, mix=0.5, seed=9)
        make_corpus(b, count=4, mix=0.5, seed=9)
        for path in sorted(a.iterdir()):
            assert path.read_bytes() == (b / path.name).read_bytes()

    def test_manifest_matches_files(self, tmp_path):
        records = make_corpus(tmp_path, count=3, mix=0.0, seed=1)
        assert formats.read_manifest(tmp_path / "corpus.manifest") == records

    def test_rejects_bad_args(self, tmp_path):
        with pytest.raises(ParameterError):
            make_corpus(tmp_path, count=0, mix=0.0, seed=1)
        with pytest.raises(ParameterError):
            make_corpus(tmp_path, count=1, mix=1.5, seed=1)


class TestFeatureDataset:
    def test_shapes_and_labels(self):
        samples = make_feature_dataset(8, seed=0, grid=(4, 4), feat_dim=8, class_count=2)
        assert len(samples) == 8
        for grid, classes in samples:
            assert grid.values.shape == (16, 8)
            assert classes
            assert set(classes) <= {1, 2}

    def test_deterministic(self):
        a = make_feature_dataset(5, seed=1)
        b = make_feature_dataset(5, seed=1)
        for (ga, ca), (gb, cb) in zip(a, b):
            assert ca == cb
            assert np.array_equal(ga.values, gb.values)
