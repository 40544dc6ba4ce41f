import numpy as np
import pytest

import helpers


@pytest.fixture(scope="session")
def natural_corpus():
    """Five 256x256 grayscale photographs in [0, 1]."""
    return helpers.natural_corpus()


@pytest.fixture(scope="session")
def corpus_image(natural_corpus):
    return natural_corpus["camera"]


@pytest.fixture(scope="session")
def tiny_manifest(tmp_path_factory):
    """Small on-disk dataset (48x48 images) for harness and CLI tests."""
    root = tmp_path_factory.mktemp("tiny_dataset")
    return helpers.make_tiny_dataset(root, n_refs=4)


@pytest.fixture(scope="session")
def desk_dataset(tmp_path_factory):
    """Desk-scale SR study dataset: 7 references x 3 scales x 3 upsamplers."""
    root = tmp_path_factory.mktemp("desk_dataset")
    return helpers.make_desk_dataset(root)


@pytest.fixture(scope="session")
def blur_model(natural_corpus, tmp_path_factory):
    """Small model trained to separate sharp from blurred content."""
    from scipy import ndimage

    from srqa.features import extract_features
    from srqa.regress.model import train_two_stage

    feats = []
    scores = []
    for img in natural_corpus.values():
        crop = img[:128, :128]
        feats.append(extract_features(crop))
        scores.append(8.0)
        feats.append(extract_features(ndimage.gaussian_filter(crop, 2.0, mode="reflect")))
        scores.append(3.0)
        feats.append(extract_features(ndimage.gaussian_filter(crop, 1.0, mode="reflect")))
        scores.append(5.0)
    return train_two_stage(
        np.vstack(feats), np.asarray(scores), n_trees=30, seed=11, min_leaf=2
    )
