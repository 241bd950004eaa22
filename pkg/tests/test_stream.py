import numpy as np
import pytest

from msana.stream import (
    ClassProbabilities,
    LabeledSample,
    Sample,
    SchemaError,
    StreamError,
    StreamSchema,
    concept_label,
    generate_abrupt_drift_stream,
    generate_gradual_drift_stream,
    gradual_drift_probability,
    read_csv_stream,
)


def test_sample_rejects_length_mismatch():
    with pytest.raises(ValueError):
        Sample(np.zeros(3), ("a", "b"), 0)


def test_class_probabilities_ties_go_low():
    p = ClassProbabilities.from_array([0.5, 0.5])
    assert p.predicted == 0
    assert ClassProbabilities.uniform(4).probs.sum() == pytest.approx(1.0)


def test_schema_needs_two_classes():
    with pytest.raises(SchemaError):
        StreamSchema(("a",), c=1)


def test_csv_three_rows(write_csv):
    p = write_csv("a,b,label\n1,2,0\n3,4,1\n5,6,0\n")
    out = list(read_csv_stream(p, StreamSchema(())))
    assert [z.index for z in out] == [0, 1, 2]
    assert [z.label for z in out] == [0, 1, 0]
    np.testing.assert_array_equal(out[1].x, [3.0, 4.0])
    assert out[0].sample.feature_names == ("a", "b")


def test_csv_constant_label(write_csv):
    p = write_csv("a,label\n1,1\n2,1\n3,1\n")
    assert all(z.label == 1 for z in read_csv_stream(p, StreamSchema((), c=2)))


def test_csv_nan_cell_becomes_zero(write_csv):
    p = write_csv("a,b,label\nNaN,2,0\n1,oops,1\n")
    stream = read_csv_stream(p, StreamSchema(()))
    rows = list(stream)
    assert rows[0].x[0] == 0.0
    assert rows[1].x[1] == 0.0
    assert stream.missing_values == 2


def test_csv_malformed_row_reports_row_number(write_csv):
    p = write_csv("a,label\n1,0\n2\n")
    with pytest.raises(StreamError) as err:
        list(read_csv_stream(p, StreamSchema(())))
    assert err.value.row == 2


def test_csv_missing_label_column(write_csv):
    p = write_csv("a,b\n1,2\n")
    with pytest.raises(SchemaError):
        list(read_csv_stream(p, StreamSchema(())))


def test_csv_label_out_of_range(write_csv):
    p = write_csv("a,label\n1,5\n")
    with pytest.raises(StreamError):
        list(read_csv_stream(p, StreamSchema(())))


def test_csv_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_csv_stream(tmp_path / "nope.csv", StreamSchema(()))


def test_schema_file_with_label_map(write_csv, tmp_path):
    schema_path = tmp_path / "schema.yaml"
    schema_path.write_text("label_column: Label\nclass_count: 2\nlabel_map:\n  BENIGN: 0\n  DDoS: 1\n")
    schema = StreamSchema.from_file(schema_path)
    p = write_csv("x,Label\n0.5,BENIGN\n0.7,DDoS\n")
    assert [z.label for z in read_csv_stream(p, schema)] == [0, 1]


def test_schema_file_rejects_unknown_keys(tmp_path):
    path = tmp_path / "schema.yaml"
    path.write_text("label_column: y\ncolour: red\n")
    with pytest.raises(SchemaError):
        StreamSchema.from_file(path)


def test_abrupt_stream_noiseless_concepts():
    s = generate_abrupt_drift_stream(1, 100, 100, 0.0)
    assert [z.index for z in s] == list(range(200))
    assert all(z.label == concept_label(z.x, "A") for z in s[:100])
    assert all(z.label == concept_label(z.x, "B") for z in s[100:])


def test_abrupt_stream_is_deterministic():
    a = generate_abrupt_drift_stream(7, 50, 50, 0.1)
    b = generate_abrupt_drift_stream(7, 50, 50, 0.1)
    assert all(np.array_equal(x.x, y.x) and x.label == y.label for x, y in zip(a, b))


def test_abrupt_stream_flip_rate():
    noisy = generate_abrupt_drift_stream(3, 5000, 5000, 0.1)
    flips = sum(z.label != concept_label(z.x, "A" if z.index < 5000 else "B") for z in noisy)
    assert abs(flips / 10000 - 0.1) <= 0.02


def test_concepts_disagree_often_enough():
    # the drift has to be visible: the two rules must disagree on a sizeable share of inputs
    X = np.random.default_rng(0).random((20000, 3))
    disagree = np.mean([concept_label(x, "A") != concept_label(x, "B") for x in X])
    assert disagree > 0.2


def test_gradual_probability_ramp():
    assert gradual_drift_probability(0, 100, 2) == 0.0
    assert gradual_drift_probability(100, 100, 2) == 0.5
    assert gradual_drift_probability(150, 100, 2) == 1.0


def test_gradual_stream_ends_and_center():
    s = generate_gradual_drift_stream(1, 300, 150, 2, 0.0)
    assert all(z.label == concept_label(z.x, "A") for z in s[:149])
    assert all(z.label == concept_label(z.x, "B") for z in s[151:])
    # at the centre, draw concept B half the time across seeds
    picks = [generate_gradual_drift_stream(seed, 21, 10, 2, 0.0, with_concepts=True)[1][10]
             for seed in range(1000)]
    assert abs(picks.count("B") / 1000 - 0.5) <= 0.05


def test_gradual_labels_follow_drawn_concept():
    s, concepts = generate_gradual_drift_stream(4, 400, 200, 100, 0.0, with_concepts=True)
    assert all(z.label == concept_label(z.x, c) for z, c in zip(s, concepts))


def test_gradual_stream_validates():
    with pytest.raises(ValueError):
        generate_gradual_drift_stream(1, 100, 0, 10)
    with pytest.raises(ValueError):
        generate_gradual_drift_stream(1, 100, 50, 0)


def test_labeled_sample_accessors():
    z = LabeledSample(Sample(np.ones(2), ("a", "b"), 4), 1)
    assert z.index == 4 and z.x.shape == (2,)
