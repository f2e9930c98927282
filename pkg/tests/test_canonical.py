"""Canonical schema: parsing, validation, harmonization, round trips."""

from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riskbench.canonical import (
    CANONICAL_COLUMNS,
    AmbiguousMapping,
    EventKind,
    EventRecord,
    FieldMapping,
    KindRules,
    MoneyUnit,
    RawTable,
    SignConvention,
    TransactionStatus,
    UnmappedRequiredField,
    Vertical,
    export_events,
    harmonize,
    parse_events,
    serialize_events,
    validate_events,
    validate_mapping,
)

UTC = timezone.utc

HEADER_LINE = ",".join(CANONICAL_COLUMNS)


def ts(text):
    return datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=UTC)


def session(player="p1", start="2025-11-17T09:30:00Z", end="2025-11-17T10:00:00Z",
            bets=10, staked=1000, net=-200, product="slots", vertical=Vertical.CASINO,
            cohort="EU"):
    return EventRecord(
        player_id=player, event_kind=EventKind.SESSION, start_time=ts(start),
        end_time=ts(end), bet_count=bets, total_staked=staked, net_outcome=net,
        product=product, vertical=vertical, cohort=cohort,
    )


def deposit(player="p1", start="2025-11-17T09:00:00Z", amount=5000,
            method="card", status=TransactionStatus.APPROVED, cohort="EU"):
    return EventRecord(
        player_id=player, event_kind=EventKind.DEPOSIT, start_time=ts(start),
        transaction_amount=amount, transaction_method=method,
        transaction_status=status, cohort=cohort,
    )


class TestParseEvents:
    def test_header_only_is_empty_pass(self):
        result = parse_events((HEADER_LINE + "\n").encode())
        assert result.records == []
        assert result.ok

    def test_session_end_before_start_is_bad_timestamp(self):
        row = "p1,SESSION,2025-11-17T10:00:00Z,2025-11-17T09:00:00Z,5,500,-100,slots,CASINO,,,,EU"
        result = parse_events(f"{HEADER_LINE}\n{row}\n".encode())
        assert result.records == []
        assert any(e.code == "BadTimestamp" and e.row == 0 for e in result.errors)

    def test_round_trip_identity(self):
        table = [session(), deposit(), session(player="p2", bets=0, staked=0, net=0)]
        result = parse_events(serialize_events(table))
        assert result.ok
        assert result.records == table

    def test_missing_column_reported(self):
        result = parse_events(b"player_id,event_kind\np1,SESSION\n")
        assert not result.ok
        assert all(e.code == "MissingColumn" for e in result.errors)
        assert any(e.field == "start_time" for e in result.errors)

    def test_unknown_kind(self):
        row = "p1,BONUS,2025-11-17T09:00:00Z,,,,,,,,,,"
        result = parse_events(f"{HEADER_LINE}\n{row}\n".encode())
        assert [e.code for e in result.errors] == ["UnknownKind"]

    def test_negative_amount(self):
        row = "p1,DEPOSIT,2025-11-17T09:00:00Z,,,,,,,-5,card,APPROVED,"
        result = parse_events(f"{HEADER_LINE}\n{row}\n".encode())
        assert any(e.code == "NegativeAmount" and e.field == "transaction_amount" for e in result.errors)

    def test_order_preserved_around_bad_rows(self):
        rows = [
            "p1,SESSION,2025-11-17T09:00:00Z,2025-11-17T09:30:00Z,1,100,-100,slots,CASINO,,,,",
            "p2,BONUS,2025-11-17T09:00:00Z,,,,,,,,,,",
            "p3,DEPOSIT,2025-11-17T09:00:00Z,,,,,,,100,card,APPROVED,",
        ]
        result = parse_events(("\n".join([HEADER_LINE] + rows) + "\n").encode())
        assert [r.player_id for r in result.records] == ["p1", "p3"]
        assert [e.row for e in result.errors] == [1]

    @given(st.binary(max_size=400))
    @settings(max_examples=300, deadline=None)
    def test_total_on_arbitrary_bytes(self, data):
        parse_events(data)  # must never raise


class TestValidateEvents:
    def test_empty_table_passes(self):
        report = validate_events([])
        assert report.passed and report.row_count == 0

    def test_zero_bets_with_stake_is_one_error(self):
        bad = session(bets=0, staked=100, net=0)
        report = validate_events([bad])
        assert len(report.errors) == 1
        assert report.errors[0].code == "InconsistentSession"

    def test_excess_loss_flagged(self):
        bad = session(staked=100, net=-101)
        report = validate_events([bad])
        assert [e.code for e in report.errors] == ["ExcessLoss"]

    def test_kind_field_crosstalk_is_error(self):
        bad = EventRecord(
            player_id="p1", event_kind=EventKind.DEPOSIT, start_time=ts("2025-11-17T09:00:00Z"),
            transaction_amount=100, transaction_method="card",
            transaction_status=TransactionStatus.APPROVED, bet_count=3,
        )
        report = validate_events([bad])
        assert any(e.code == "FieldNotApplicable" and e.field == "bet_count" for e in report.errors)

    def test_errors_ordered_by_row_then_field(self):
        bad1 = session(player="a", bets=0, staked=5, net=5)
        bad2 = session(player="b", staked=10, net=-11)
        report = validate_events([bad2, bad1])  # construction order irrelevant to report order
        assert [(e.row, e.field) for e in report.errors] == sorted((e.row, e.field) for e in report.errors)


OPERATOR_MAPPING = FieldMapping(
    source_to_canonical=(
        ("customer", "player_id"),
        ("session_start", "start_time"),
        ("session_end", "end_time"),
        ("wagers", "bet_count"),
        ("amount", "total_staked"),
        ("net_result", "net_outcome"),
        ("game", "product"),
        ("channel", "vertical"),
        ("region", "cohort"),
    ),
    sign_convention=SignConvention.OPERATOR_WIN_POSITIVE,
    unit=MoneyUnit.WHOLE_CURRENCY,
    kind_rules=KindRules(mode="constant", kind="SESSION"),
)


def raw_session_row(amount="12.50", net="50.00"):
    return [
        "p9", "2025-11-17T09:30:00Z", "2025-11-17T10:00:00Z", "4",
        amount, net, "slots", "CASINO", "EU",
    ]


def raw_header():
    return [s for s, _ in OPERATOR_MAPPING.source_to_canonical]


class TestHarmonize:
    def test_whole_currency_to_cents(self):
        raw = RawTable(header=raw_header(), rows=[raw_session_row(amount="12.50", net="-1.00")])
        result = harmonize(raw, OPERATOR_MAPPING)
        assert result.ok
        assert result.records[0].total_staked == 1250

    def test_operator_win_positive_flips_sign(self):
        raw = RawTable(header=raw_header(), rows=[raw_session_row(amount="60.00", net="50.00")])
        result = harmonize(raw, OPERATOR_MAPPING)
        assert result.ok
        assert result.records[0].net_outcome == -5000

    def test_unmapped_required_field_raises(self):
        mapping = FieldMapping(
            source_to_canonical=(("customer", "player_id"),),
            sign_convention=SignConvention.PLAYER_WIN_POSITIVE,
            unit=MoneyUnit.CENTS,
            kind_rules=KindRules(mode="constant", kind="SESSION"),
        )
        with pytest.raises(UnmappedRequiredField):
            harmonize(RawTable(header=["customer"], rows=[]), mapping)

    def test_duplicate_canonical_target_is_ambiguous(self):
        mapping = FieldMapping(
            source_to_canonical=(("a", "total_staked"), ("b", "total_staked")),
            sign_convention=SignConvention.PLAYER_WIN_POSITIVE,
            unit=MoneyUnit.CENTS,
            kind_rules=KindRules(mode="constant", kind="SESSION"),
        )
        with pytest.raises(AmbiguousMapping):
            validate_mapping(mapping, ["a", "b"])

    def test_conversion_overflow_reported_per_row(self):
        raw = RawTable(header=raw_header(), rows=[raw_session_row(amount="99999999999999999")])
        result = harmonize(raw, OPERATOR_MAPPING)
        assert any(e.code == "ConversionOverflow" for e in result.errors)
        assert result.records == []

    def test_sub_cent_precision_rejected(self):
        raw = RawTable(header=raw_header(), rows=[raw_session_row(amount="1.005")])
        result = harmonize(raw, OPERATOR_MAPPING)
        assert any(e.code == "BadValue" and e.field == "total_staked" for e in result.errors)


# Strategies for the export/harmonize round-trip property.

_ids = st.text(alphabet=st.characters(min_codepoint=33, max_codepoint=126), min_size=1, max_size=16)
_base = datetime(2025, 1, 1, tzinfo=UTC)


@st.composite
def canonical_records(draw):
    player = draw(_ids)
    cohort = draw(st.sampled_from(["", "EU", "NA", "x,y"]))
    start = _base + timedelta(seconds=draw(st.integers(0, 10**6)))
    kind = draw(st.sampled_from(list(EventKind)))
    if kind is EventKind.SESSION:
        bets = draw(st.integers(0, 50))
        if bets == 0:
            staked = net = 0
        else:
            staked = draw(st.integers(0, 10**7))
            net = draw(st.integers(-staked, 10**7))
        return session(
            player=player, cohort=cohort,
            start=start.strftime("%Y-%m-%dT%H:%M:%SZ"),
            end=(start + timedelta(seconds=draw(st.integers(0, 7200)))).strftime("%Y-%m-%dT%H:%M:%SZ"),
            bets=bets, staked=staked, net=net,
            product=draw(st.sampled_from(["slots", "live,dealer", "draw"])),
            vertical=draw(st.sampled_from(list(Vertical))),
        )
    return EventRecord(
        player_id=player, event_kind=kind, start_time=start,
        transaction_amount=draw(st.integers(1, 10**7)),
        transaction_method=draw(st.sampled_from(["card", "paypal", "bank"])),
        transaction_status=draw(st.sampled_from(list(TransactionStatus))),
        cohort=cohort,
    )


@st.composite
def full_mappings(draw):
    """A well-formed mapping covering every canonical column under fresh names."""
    rename = {c: f"src_{c}_{draw(st.integers(0, 9))}" for c in CANONICAL_COLUMNS if c != "event_kind"}
    pairs = tuple((rename[c], c) for c in CANONICAL_COLUMNS if c != "event_kind")
    tags = draw(st.permutations(["s", "d", "w"]))
    rules = KindRules(
        mode="column",
        column="row_type",
        values={tags[0]: "SESSION", tags[1]: "DEPOSIT", tags[2]: "WITHDRAWAL"},
    )
    return FieldMapping(
        source_to_canonical=pairs,
        sign_convention=draw(st.sampled_from(list(SignConvention))),
        unit=draw(st.sampled_from(list(MoneyUnit))),
        kind_rules=rules,
    )


class TestRoundTrips:
    @given(st.lists(canonical_records(), max_size=12), full_mappings())
    @settings(max_examples=150, deadline=None)
    def test_harmonize_export_identity(self, table, mapping):
        raw = export_events(table, mapping)
        result = harmonize(raw, mapping)
        assert result.ok, result.errors
        assert result.records == table

    @given(st.lists(canonical_records(), max_size=12))
    @settings(max_examples=150, deadline=None)
    def test_serialize_parse_identity(self, table):
        result = parse_events(serialize_events(table))
        assert result.ok
        assert result.records == table
        assert validate_events(table).passed
