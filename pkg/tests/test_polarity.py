import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ganitha.errors import TrainingError
from ganitha.lang import split_question_clause
from ganitha.nb_tagger import TaggedToken, tag_segmented
from ganitha.polarity import (DIM, NEGATIVE, POSITIVE, PolarityConfig, PolarityModel, accuracy,
                              classify_polarity, classify_vector, featurize_sentence, fnv1a_64,
                              loss_and_gradients, sigmoid, train_polarity, train_polarity_vectors)
from ganitha.segmenter import split_sentences

from helpers import central_difference, random_polarity, relative_error


def tagged(pairs):
    return [TaggedToken(w, t) for w, t in pairs]


@pytest.mark.parametrize("text,expected", [
    ("", 0xCBF29CE484222325),
    ("a", 0xAF63DC4C8601EC8C),
    ("foobar", 0x85944171F73967E8),
])
def test_fnv1a_reference_vectors(text, expected):
    assert fnv1a_64(text) == expected


def test_numeral_placeholder():
    a = featurize_sentence(tagged([("අඹ", "NN"), ("10", "CD"), ("ඇත", "VB")]))
    b = featurize_sentence(tagged([("අඹ", "NN"), ("99", "CD"), ("ඇත", "VB")]))
    assert np.array_equal(a, b)


def test_mango_pair_vectors_differ():
    a = featurize_sentence(tagged([("මා", "PRO"), ("ලඟ", "PP"), ("අඹ", "ADJ"), ("ගෙඩි", "NN"),
                                   ("10", "CD"), ("ක්", "PP"), ("ඇත", "VB")]))
    b = featurize_sentence(tagged([("ඉන්", "PRO"), ("2", "CD"), ("ක්", "PP"), ("මල්ලිට", "NN"),
                                   ("දුන්", "VB"), ("විට", "PP")]))
    assert not np.array_equal(a, b)


def test_empty_sentence_zero_vector():
    v = featurize_sentence([])
    assert v.shape == (DIM,) and not v.any()


def test_interrogative_slot():
    v = featurize_sentence([("ගණන", "NN"), ("කොපමණද", "QW")])
    assert v[-1] == 1.0
    assert featurize_sentence([("ගණන", "NN")])[-1] == 0.0


def test_tuple_and_token_inputs_agree():
    pairs = [("අඹ", "NN"), ("3", "CD"), ("දුන්", "VB")]
    assert np.array_equal(featurize_sentence(pairs), featurize_sentence(tagged(pairs)))


def test_zero_model_is_exactly_half():
    model = PolarityModel.zeros(8, 3)
    p = model.forward(np.ones((1, 8)))[0][0]
    assert p == 0.5
    assert classify_vector(model, np.ones(8)) == (POSITIVE, 0.5)


def test_sigmoid_extremes_are_finite():
    z = np.array([-1000.0, 0.0, 1000.0])
    np.testing.assert_array_equal(sigmoid(z), [0.0, 0.5, 1.0])


@pytest.mark.parametrize("seed", range(3))
def test_backprop_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    D, H, N = 8, 3, 6
    model = random_polarity(rng, D, H)
    X = rng.normal(size=(N, D))
    y = rng.integers(0, 2, N).astype(float)
    _, grads = loss_and_gradients(model, X, y)

    def loss_at(flat):
        w1 = flat[:H * D].reshape(H, D)
        b1 = flat[H * D:H * D + H]
        w2 = flat[H * D + H:H * D + 2 * H]
        return loss_and_gradients(PolarityModel(w1, b1, w2, flat[-1]), X, y)[0]

    flat = np.concatenate([model.w1.ravel(), model.b1, model.w2, [model.b2]])
    fd = central_difference(loss_at, flat, 1e-5)
    analytic = np.concatenate([grads[0].ravel(), grads[1], grads[2], [grads[3]]])
    assert relative_error(analytic, fd, floor=1e-7).max() <= 1e-4


def test_xor_needs_and_gets_the_hidden_layer():
    X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
    y = np.array([0, 1, 1, 0], dtype=float)
    model = train_polarity_vectors(X, y, PolarityConfig(hidden=4, epochs=5000, learning_rate=2.0,
                                                        seed=0, input_dim=2))
    assert accuracy(model, X, y) >= 0.95


def test_separable_set_within_500_epochs():
    pos = [[("අඹ", "NN"), (str(n), "CD"), ("ගෙනාවා", "VB")] for n in range(10)]
    neg = [[("අඹ", "NN"), (str(n), "CD"), ("දුන්නා", "VB")] for n in range(10)]
    data = [(s, POSITIVE) for s in pos] + [(s, NEGATIVE) for s in neg]
    model = train_polarity(data, PolarityConfig(epochs=500, learning_rate=0.5))
    assert all(classify_polarity(model, s).label == lab for s, lab in data)


def test_same_seed_bit_identical():
    rng = np.random.default_rng(0)
    X = rng.integers(0, 2, (12, 16)).astype(float)
    y = (X[:, 0] > 0).astype(float)
    y[0] = 1 - y[0]
    cfg = PolarityConfig(hidden=3, epochs=50, input_dim=16, seed=9)
    assert train_polarity_vectors(X, y, cfg) == train_polarity_vectors(X, y, cfg)
    other = train_polarity_vectors(X, y, PolarityConfig(hidden=3, epochs=50, input_dim=16, seed=10))
    assert other != train_polarity_vectors(X, y, cfg)


def test_loss_non_increasing_with_small_rate():
    rng = np.random.default_rng(1)
    X = rng.integers(0, 3, (30, 20)).astype(float)
    y = (X[:, :5].sum(axis=1) > 5).astype(float)
    model = train_polarity_vectors(X, y, PolarityConfig(hidden=5, epochs=300, learning_rate=0.01,
                                                        input_dim=20))
    h = model.history
    assert all(b <= a + 1e-15 for a, b in zip(h, h[1:]))


def test_single_class_rejected():
    with pytest.raises(TrainingError):
        train_polarity_vectors(np.ones((3, 4)), np.ones(3), PolarityConfig(input_dim=4))


def test_non_finite_features_rejected():
    X = np.array([[np.inf, 0.0], [0.0, 1.0]])
    with pytest.raises(TrainingError):
        train_polarity_vectors(X, np.array([0.0, 1.0]), PolarityConfig(hidden=2, input_dim=2))


def test_divergence_guard(monkeypatch):
    from ganitha import polarity

    def exploding(model, X, y):
        loss, grads = loss_and_gradients(model, X, y)
        return loss, (grads[0] * np.inf, *grads[1:])

    monkeypatch.setattr(polarity, "loss_and_gradients", exploding)
    X = np.eye(2)
    with pytest.raises(TrainingError):
        train_polarity_vectors(X, np.array([0.0, 1.0]), PolarityConfig(hidden=2, epochs=3, input_dim=2))


def test_mango_sentences_with_shipped_model(bundle):
    s1, s2 = split_sentences("මා ලඟ අඹ ගෙඩි 10 ක් ඇත . ඉන් 2 ක් මල්ලිට දුන් විට තව ගොපමණ ඉතුරුද ?")
    first = tag_segmented(bundle.nb, s1)
    assert classify_polarity(bundle.polarity, first).label == POSITIVE
    clause, _ = split_question_clause(tag_segmented(bundle.nb, s2).tokens)
    assert [t.surface for t in clause][:2] == ["ඉන්", "2"]
    assert classify_polarity(bundle.polarity, clause).label == NEGATIVE


words = st.sampled_from(["අඹ", "ගෙඩි", "දුන්", "ඇත", "ක්", "මල්ලිට"])
tags = st.sampled_from(["NN", "VB", "PP", "PRO"])


@given(st.lists(st.one_of(st.tuples(words, tags), st.integers(0, 10**6).map(lambda n: (str(n), "CD"))),
                max_size=10),
       st.integers(0, 10**6))
def test_numeral_invariance_property(bundle, sentence, replacement):
    swapped = [(str(replacement), t) if t == "CD" else (w, t) for w, t in sentence]
    assert np.array_equal(featurize_sentence(sentence), featurize_sentence(swapped))
    assert classify_polarity(bundle.polarity, sentence) == classify_polarity(bundle.polarity, swapped)


@given(st.lists(st.tuples(words, tags), max_size=8))
def test_featurize_is_pure(sentence):
    assert np.array_equal(featurize_sentence(sentence), featurize_sentence(list(sentence)))
