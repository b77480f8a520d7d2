import numpy as np
import pytest

from smokeintent.ingest import (
    CohortConfig,
    Dataset,
    DomainViolation,
    IngestError,
    RawTable,
    SignalConfig,
    SplitSpec,
    derive_target,
    filter_never_smokers,
    generate_synthetic,
    impute_nulls,
    parse_csv,
    prepare,
    prepared_csv_bytes,
    raw_csv_bytes,
    read_prepared_csv,
    train_test_split,
)


def tiny_table(rows, catalog):
    cols = [c.column_id for c in catalog.columns()]
    return RawTable(columns=cols, rows=rows)


def make_row(catalog, **values):
    """One raw row keyed by column id; unset columns default to 0."""
    cols = [c.column_id for c in catalog.columns()]
    return [values.get(c, 0) for c in cols]


class TestParseCsv:
    def test_blank_cell_becomes_null(self, tiny_catalog):
        table = parse_csv(b"P1,P2\n1,\n2,1\n3,2\n", tiny_catalog)
        assert table.rows[0] == [1, None]
        assert table.rows[1] == [2, 1]

    def test_unparseable_cell_becomes_null(self, tiny_catalog):
        table = parse_csv(b"P1\nx\n2\n", tiny_catalog)
        assert table.rows[0] == [None]

    def test_integral_float_parses(self, tiny_catalog):
        table = parse_csv(b"P1\n2.0\n", tiny_catalog)
        assert table.rows[0] == [2]

    def test_arity_mismatch_rejected(self, tiny_catalog):
        with pytest.raises(IngestError, match="line 3"):
            parse_csv(b"P1,P2\n1,2\n1\n", tiny_catalog)

    def test_empty_input_rejected(self, tiny_catalog):
        with pytest.raises(IngestError, match="header"):
            parse_csv(b"", tiny_catalog)

    def test_zero_data_rows_rejected(self, tiny_catalog):
        with pytest.raises(IngestError, match="no data rows"):
            parse_csv(b"P1,P2\n", tiny_catalog)

    def test_disjoint_header_rejected_listing_names(self, tiny_catalog):
        with pytest.raises(IngestError, match="A1.*B1"):
            parse_csv(b"A1,B1\n1,2\n", tiny_catalog)

    def test_extra_columns_flagged_but_retained(self, tiny_catalog):
        table = parse_csv(b"P1,WEIRD\n1,9\n", tiny_catalog)
        assert table.extra_columns == ("WEIRD",)
        assert table.columns == ["P1", "WEIRD"]


class TestImpute:
    def test_replaces_nulls_with_zero(self):
        table = RawTable(columns=["a", "b", "c"], rows=[[1, None, 3]])
        assert impute_nulls(table).rows == [[1, 0, 3]]

    def test_all_null_row(self):
        table = RawTable(columns=["a", "b"], rows=[[None, None]])
        assert impute_nulls(table).rows == [[0, 0]]

    def test_identity_on_null_free_table(self):
        table = RawTable(columns=["a"], rows=[[1], [2]])
        assert impute_nulls(table).rows == table.rows

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            rows = [
                [None if rng.random() < 0.3 else int(rng.integers(0, 5)) for _ in range(6)]
                for _ in range(10)
            ]
            table = RawTable(columns=[f"c{i}" for i in range(6)], rows=rows)
            once = impute_nulls(table)
            twice = impute_nulls(once)
            assert once.rows == twice.rows


class TestCohortFilter:
    def test_ever_user_removed(self, tiny_catalog):
        rows = [make_row(tiny_catalog, C1=1, T1=4, T2=4), make_row(tiny_catalog, C1=2, T1=4, T2=4)]
        kept, removed = filter_never_smokers(tiny_table(rows, tiny_catalog), tiny_catalog)
        assert len(kept.rows) == 1
        assert removed == {"C1": 1}

    def test_unanswered_cohort_question_removed(self, tiny_catalog):
        rows = [make_row(tiny_catalog, C1=0)]
        kept, _ = filter_never_smokers(tiny_table(rows, tiny_catalog), tiny_catalog)
        assert kept.rows == []

    def test_output_is_subset_and_refilter_is_noop(self, tiny_catalog):
        rng = np.random.default_rng(1)
        rows = [make_row(tiny_catalog, C1=int(rng.integers(0, 3))) for _ in range(30)]
        table = tiny_table(rows, tiny_catalog)
        kept, _ = filter_never_smokers(table, tiny_catalog)
        assert all(r in table.rows for r in kept.rows)
        again, removed = filter_never_smokers(kept, tiny_catalog)
        assert again.rows == kept.rows
        assert all(v == 0 for v in removed.values())

    def test_missing_enabled_column_rejected(self, tiny_catalog):
        table = RawTable(columns=["P1"], rows=[[1]])
        with pytest.raises(IngestError, match="C1"):
            filter_never_smokers(table, tiny_catalog)

    def test_q59_disabled_by_default(self, nyts_catalog):
        config = CohortConfig()
        enabled = {q.id for q in config.enabled_questions(nyts_catalog)}
        assert enabled == {"Q7", "Q19", "Q24", "Q39"}

    def test_q59_and_q28_opt_in(self, nyts_catalog):
        config = CohortConfig(disabled=(), include_non_esmoker=True)
        enabled = {q.id for q in config.enabled_questions(nyts_catalog)}
        assert enabled == {"Q7", "Q19", "Q24", "Q39", "Q59", "Q28"}


class TestDeriveTarget:
    def test_yes_codes_label_one(self, tiny_catalog):
        rows = [make_row(tiny_catalog, T1=2, T2=4)]
        ds, _ = derive_target(tiny_table(rows, tiny_catalog), tiny_catalog, "q16-only")
        assert ds.y.tolist() == [1]

    def test_no_codes_label_zero(self, tiny_catalog):
        rows = [make_row(tiny_catalog, T1=4, T2=1)]
        ds, _ = derive_target(tiny_table(rows, tiny_catalog), tiny_catalog, "q16-only")
        assert ds.y.tolist() == [0]

    def test_unanswered_target_dropped(self, tiny_catalog):
        rows = [make_row(tiny_catalog, T1=0, T2=1), make_row(tiny_catalog, T1=3, T2=3)]
        ds, summary = derive_target(tiny_table(rows, tiny_catalog), tiny_catalog, "q16-only")
        assert ds.n_rows == 1
        assert summary.n_dropped == 1

    def test_any_policy_any_yes_wins(self, tiny_catalog):
        rows = [make_row(tiny_catalog, T1=4, T2=1)]
        ds, _ = derive_target(tiny_table(rows, tiny_catalog), tiny_catalog, "any-of-six")
        assert ds.y.tolist() == [1]

    def test_any_policy_requires_all_no_for_zero(self, tiny_catalog):
        rows = [
            make_row(tiny_catalog, T1=4, T2=3),  # all no -> 0
            make_row(tiny_catalog, T1=4, T2=0),  # one unanswered, none yes -> dropped
        ]
        ds, summary = derive_target(tiny_table(rows, tiny_catalog), tiny_catalog, "any-of-six")
        assert ds.y.tolist() == [0]
        assert summary.n_dropped == 1

    def test_features_exclude_target_and_cohort_columns(self, tiny_catalog):
        rows = [make_row(tiny_catalog, P1=1, T1=1, T2=1, C1=2)]
        ds, _ = derive_target(tiny_table(rows, tiny_catalog), tiny_catalog)
        assert ds.feature_names == ["P1", "P2", "M1_1", "M1_2"]

    def test_label_depends_only_on_target_question(self, tiny_catalog):
        rng = np.random.default_rng(3)
        rows = [
            make_row(
                tiny_catalog,
                P1=int(rng.integers(0, 4)),
                P2=int(rng.integers(0, 3)),
                T1=int(rng.integers(1, 5)),
                T2=int(rng.integers(1, 5)),
            )
            for _ in range(40)
        ]
        table = tiny_table(rows, tiny_catalog)
        ds, _ = derive_target(table, tiny_catalog, "q16-only")
        # permute a non-target column: labels must not move
        perm = np.random.default_rng(4).permutation(len(rows))
        p1 = table.columns.index("P1")
        shuffled_rows = [list(r) for r in rows]
        permuted_values = [rows[j][p1] for j in perm]
        for r, v in zip(shuffled_rows, permuted_values):
            r[p1] = v
        ds2, _ = derive_target(tiny_table(shuffled_rows, tiny_catalog), tiny_catalog, "q16-only")
        assert ds.y.tolist() == ds2.y.tolist()

    def test_out_of_domain_cell_reported(self, tiny_catalog):
        rows = [make_row(tiny_catalog, P1=7, T1=1, T2=1)]
        with pytest.raises(DomainViolation, match="P1=7"):
            derive_target(tiny_table(rows, tiny_catalog), tiny_catalog)

    def test_missing_target_column_rejected(self, tiny_catalog):
        cols = [c.column_id for c in tiny_catalog.columns() if c.column_id != "T1"]
        table = RawTable(columns=cols, rows=[[0] * len(cols)])
        with pytest.raises(IngestError):
            derive_target(table, tiny_catalog, "any-of-six")


def balanced_dataset(n, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.integers(1, 4, size=(n, 3))
    y = np.arange(n) % 2
    return Dataset([f"f{i}" for i in range(3)], X, y, np.arange(n))


class TestSplit:
    def test_sizes_and_determinism(self):
        ds = balanced_dataset(10)
        spec = SplitSpec(test_fraction=0.2, seed=7)
        train1, test1 = train_test_split(ds, spec)
        train2, test2 = train_test_split(ds, spec)
        assert (train1.n_rows, test1.n_rows) == (8, 2)
        assert train1.row_ids.tolist() == train2.row_ids.tolist()
        assert test1.row_ids.tolist() == test2.row_ids.tolist()

    def test_partition_is_disjoint_and_covering(self):
        ds = balanced_dataset(37)
        train, test = train_test_split(ds, SplitSpec(test_fraction=0.3, seed=1))
        ids = sorted(train.row_ids.tolist() + test.row_ids.tolist())
        assert ids == list(range(37))

    def test_stratified_four_rows(self):
        ds = balanced_dataset(4)
        train, test = train_test_split(ds, SplitSpec(test_fraction=0.5, seed=3, stratified=True))
        assert sorted(test.y.tolist()) == [0, 1]
        assert sorted(train.y.tolist()) == [0, 1]

    def test_stratified_proportions_within_one_row(self):
        rng = np.random.default_rng(5)
        y = (rng.random(200) < 0.25).astype(int)
        ds = Dataset(["f0"], rng.integers(1, 3, size=(200, 1)), y, np.arange(200))
        train, test = train_test_split(ds, SplitSpec(test_fraction=0.2, seed=11))
        for cls in (0, 1):
            expected = 0.2 * np.sum(y == cls)
            got = np.sum(test.y == cls)
            assert abs(got - expected) <= 1.0

    def test_different_seeds_differ(self):
        ds = balanced_dataset(120)
        base = train_test_split(ds, SplitSpec(seed=0))[1].row_ids.tolist()
        differing = sum(
            train_test_split(ds, SplitSpec(seed=s))[1].row_ids.tolist() != base
            for s in range(1, 101)
        )
        assert differing / 100 > 0.99

    def test_stratified_thin_class_rejected(self):
        ds = Dataset(["f0"], np.ones((5, 1), dtype=int), np.array([0, 0, 0, 0, 1]), np.arange(5))
        with pytest.raises(IngestError, match="class"):
            train_test_split(ds, SplitSpec(test_fraction=0.4, seed=0, stratified=True))

    def test_bad_fraction_rejected(self):
        with pytest.raises(IngestError):
            SplitSpec(test_fraction=1.5)


class TestSynthetic:
    def test_same_seed_byte_identical(self, tiny_catalog):
        a = raw_csv_bytes(generate_synthetic(50, tiny_catalog, seed=9))
        b = raw_csv_bytes(generate_synthetic(50, tiny_catalog, seed=9))
        assert a == b

    def test_different_seed_differs(self, tiny_catalog):
        a = raw_csv_bytes(generate_synthetic(50, tiny_catalog, seed=9))
        b = raw_csv_bytes(generate_synthetic(50, tiny_catalog, seed=10))
        assert a != b

    def test_non_predictor_signal_rejected(self, tiny_catalog):
        with pytest.raises(IngestError, match="T1"):
            generate_synthetic(5, tiny_catalog, SignalConfig(weights={"T1": 1.0}), seed=0)

    def test_rows_lower_bound(self, tiny_catalog):
        with pytest.raises(IngestError):
            generate_synthetic(0, tiny_catalog, seed=0)

    def test_zero_weights_label_near_prior(self, tiny_catalog):
        # no signal: label is a fair coin, so accuracy of any classifier
        # should hover around the max class prior
        raw = generate_synthetic(3000, tiny_catalog, SignalConfig(ever_rate=0.0), seed=2)
        ds, _ = prepare(raw, tiny_catalog)
        prior = max(np.mean(ds.y == 1), np.mean(ds.y == 0))
        assert abs(prior - 0.5) < 0.05

    def test_planted_signal_is_learnable(self, tiny_catalog):
        from smokeintent.models import TreeConfig, fit_classifier, predict_labels

        sig = SignalConfig(weights={"P1": 6.0, "P2": -6.0}, bias=-2.0, ever_rate=0.0)
        raw = generate_synthetic(3000, tiny_catalog, sig, seed=4)
        ds, _ = prepare(raw, tiny_catalog)
        train, test = train_test_split(ds, SplitSpec(seed=0))
        model = fit_classifier("decision-tree", train.X, train.y, TreeConfig(max_depth=3))
        acc = float(np.mean(predict_labels(model, test.X) == test.y))
        assert acc >= 0.95


class TestPreparedCsv:
    def test_round_trip(self, tmp_path):
        ds = balanced_dataset(12)
        path = tmp_path / "prepared.csv"
        path.write_bytes(prepared_csv_bytes(ds))
        loaded = read_prepared_csv(path)
        assert loaded.feature_names == ds.feature_names
        assert np.array_equal(loaded.X, ds.X)
        assert np.array_equal(loaded.y, ds.y)

    def test_missing_label_column_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(IngestError, match="__label__"):
            read_prepared_csv(path)


class TestPrepareReport:
    def test_stage_counts_reconcile(self, tiny_catalog):
        sig = SignalConfig(missing_rate=0.1, target_missing_rate=0.15, ever_rate=0.3)
        raw = generate_synthetic(400, tiny_catalog, sig, seed=6)
        ds, rep = prepare(raw, tiny_catalog)
        assert rep.rows_in == 400
        assert rep.cohort_rows == 400 - sum(rep.cohort_removed.values())
        assert rep.rows_out == rep.cohort_rows - rep.target_dropped
        assert rep.rows_out == ds.n_rows
        assert rep.n_yes + rep.n_no == rep.rows_out
        # independent recount of the imputation stage
        nulls = sum(cell is None for row in raw.rows for cell in row)
        assert rep.nulls_imputed == nulls
