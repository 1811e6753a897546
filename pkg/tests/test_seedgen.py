import numpy as np
import pytest

from seedmine.errors import ParameterError, ShapeError
from seedmine.maps import AttentionStack
from seedmine.seedgen import background_extract


def stack_of(planes):
    return AttentionStack(np.asarray(planes, dtype=np.float32), normalized=True)


def test_everything_quiet_is_background():
    oacam = stack_of(np.zeros((2, 3, 3)))
    labels = background_extract(oacam, np.zeros((3, 3)), present=[1, 2])
    assert not labels.any()


def test_salient_and_explained_takes_argmax_class():
    planes = np.zeros((7, 1, 1), dtype=np.float32)
    planes[6, 0, 0] = 0.8  # class 7
    labels = background_extract(
        stack_of(planes), np.array([[0.9]]), present=[7], t_bg=0.3, t_sal=0.5
    )
    assert labels[0, 0] == 7


def test_salient_but_unexplained_is_ignore():
    planes = np.full((3, 1, 1), 0.1, dtype=np.float32)
    labels = background_extract(stack_of(planes), np.array([[0.9]]), present=[1, 2, 3])
    assert labels[0, 0] == 255


def test_non_salient_attention_is_still_background():
    # saliency owns the background cue: strong attention outside the salient
    # region stays background, which is the false-negative mining repairs
    planes = np.full((1, 1, 1), 0.9, dtype=np.float32)
    labels = background_extract(stack_of(planes), np.array([[0.1]]), present=[1])
    assert labels[0, 0] == 0


def test_argmax_tie_breaks_to_smallest_class():
    planes = np.full((3, 1, 1), 0.7, dtype=np.float32)
    labels = background_extract(stack_of(planes), np.array([[0.9]]), present=[2, 3])
    assert labels[0, 0] == 2


def test_output_alphabet():
    rng = np.random.default_rng(0)
    oacam = stack_of(rng.random((4, 8, 8)))
    labels = background_extract(oacam, rng.random((8, 8)), present=[1, 3])
    assert set(np.unique(labels)) <= {0, 1, 3, 255}


def test_raising_t_bg_never_creates_labels_from_background():
    rng = np.random.default_rng(1)
    oacam = stack_of(rng.random((3, 10, 10)))
    saliency = rng.random((10, 10))
    low = background_extract(oacam, saliency, present=[1, 2, 3], t_bg=0.2)
    high = background_extract(oacam, saliency, present=[1, 2, 3], t_bg=0.6)
    was_background = low == 0
    assert not ((high[was_background] >= 1) & (high[was_background] != 255)).any()
    # label set can only move class -> ignore as the threshold rises
    assert np.array_equal(high == 0, low == 0)


def test_threshold_domain():
    oacam = stack_of(np.zeros((1, 2, 2)))
    sal = np.zeros((2, 2))
    for bad in (0.0, 1.0, -0.5):
        with pytest.raises(ParameterError):
            background_extract(oacam, sal, present=[1], t_bg=bad)
        with pytest.raises(ParameterError):
            background_extract(oacam, sal, present=[1], t_sal=bad)


def test_present_set_validation():
    oacam = stack_of(np.zeros((2, 2, 2)))
    sal = np.zeros((2, 2))
    with pytest.raises(ParameterError):
        background_extract(oacam, sal, present=[])
    with pytest.raises(ParameterError):
        background_extract(oacam, sal, present=[5])


def test_shape_mismatch():
    oacam = stack_of(np.zeros((1, 2, 2)))
    with pytest.raises(ShapeError):
        background_extract(oacam, np.zeros((3, 3)), present=[1])


def test_planted_non_salient_objects_never_get_their_class(corpus_dir, corpus_records):
    from seedmine import formats
    from seedmine.maps import normalize

    checked = 0
    for rec in corpus_records[:20]:
        if rec.is_simple:
            continue
        oacam = normalize(AttentionStack.load(corpus_dir / f"{rec.image_id}.oacam.fmap"))
        saliency = formats.read_saliency(corpus_dir / f"{rec.image_id}.sal.pgm")
        gt = formats.read_label_map(corpus_dir / f"{rec.image_id}.gt.pgm")
        labels = background_extract(oacam, saliency, rec.present_classes)
        non_salient_object = (gt != 0) & (saliency < 0.5)
        assert not (labels[non_salient_object] == gt[non_salient_object]).any()
        checked += 1
    assert checked > 0
