from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tabgen.table import (
    CellTuple,
    EmptyInput,
    InvalidTable,
    Orientation,
    StructuralError,
    Table,
    dedupe_headers,
    header_issues,
    normalize_text,
    parse_flat,
    render_markdown,
    serialize_flat,
    table_from_json,
    table_to_json,
    to_tuples,
    validate,
)

# Already-normalized building blocks: the flat format cannot represent "|"
# or "<NEWLINE>" inside a cell, and normalization is identity on these.
WORDS = st.text(alphabet="abcdefghijklmnopqrstuvwxyz0123456789", min_size=1, max_size=8)
PHRASES = st.lists(WORDS, min_size=1, max_size=3).map(" ".join)
VALUES = st.one_of(st.none(), PHRASES)


@st.composite
def attribute_tables(draw):
    headers = draw(st.lists(PHRASES, min_size=1, max_size=6, unique=True))
    return Table.attribute_value([(h, draw(VALUES)) for h in headers])


@st.composite
def matrix_tables(draw):
    row_headers = draw(st.lists(PHRASES, min_size=1, max_size=5, unique=True))
    col_headers = draw(st.lists(PHRASES, min_size=1, max_size=5, unique=True))
    cells = [[draw(VALUES) for _ in col_headers] for _ in row_headers]
    return Table.matrix(row_headers, col_headers, cells)


class TestValidate:
    def test_team_grid_is_valid(self, rotowire_team_sample):
        assert validate(rotowire_team_sample.gold).valid

    def test_ragged_rows_one_violation(self):
        table = Table.matrix(["a", "b"], ["x", "y", "z"], [["1", "2", "3"], ["1", "2", "3", "4"]])
        report = validate(table)
        assert not report.valid
        assert len(report.violations) == 1
        assert report.violations[0].kind == "row_width"
        assert (report.violations[0].expected, report.violations[0].observed) == (3, 4)

    def test_empty_table_is_valid(self):
        assert validate(Table.matrix([], [], [])).valid

    def test_row_count_mismatch(self):
        table = Table.matrix(["a", "b"], ["x"], [["1"]])
        report = validate(table)
        assert not report.valid
        assert report.violations[0].kind == "row_count"

    def test_attribute_value_always_valid(self):
        assert validate(Table.attribute_value([("Name", None)])).valid

    @given(matrix_tables(), st.randoms())
    def test_row_permutation_never_changes_validity(self, table, rng):
        order = list(range(len(table.row_headers)))
        rng.shuffle(order)
        permuted = Table.matrix(
            [table.row_headers[i] for i in order],
            table.col_headers,
            [table.cells[i] for i in order],
        )
        assert validate(permuted).valid == validate(table).valid


class TestNormalize:
    def test_collapses_and_lowercases(self):
        assert normalize_text("  The   Eagle ") == "the eagle"

    def test_date(self):
        assert normalize_text("12 February 1949") == "12 february 1949"

    def test_empty(self):
        assert normalize_text("") == ""

    def test_strips_quotes(self):
        assert normalize_text('"The Eagle"') == "the eagle"
        assert normalize_text("“quoted”") == "quoted"

    @given(st.text(max_size=40))
    def test_idempotent(self, text):
        assert normalize_text(normalize_text(text)) == normalize_text(text)


class TestDedupe:
    def test_suffixes_duplicates(self):
        assert dedupe_headers(["Name", "Name"]) == ["Name", "Name #2"]

    def test_case_insensitive(self):
        assert dedupe_headers(["Name", "name"]) == ["Name", "name #2"]

    def test_triple(self):
        assert dedupe_headers(["a", "a", "a"]) == ["a", "a #2", "a #3"]

    def test_suffix_collision(self):
        assert dedupe_headers(["a", "a #2", "a"]) == ["a", "a #2", "a #3"]


class TestSerialize:
    def test_attribute_value_format(self):
        table = Table.attribute_value([("Name", "The Eagle"), ("Food", "Japanese")])
        assert serialize_flat(table) == "Name | The Eagle<NEWLINE>Food | Japanese"

    def test_matrix_corner_is_empty(self):
        table = Table.matrix(["Suns"], ["Wins"], [["46"]])
        assert serialize_flat(table) == " | Wins<NEWLINE>Suns | 46"

    def test_absent_cell_serializes_empty(self):
        table = Table.matrix(["Hawks"], ["Wins", "Points in 4th quarter"], [["46", None]])
        assert serialize_flat(table) == " | Wins | Points in 4th quarter<NEWLINE>Hawks | 46 | "

    def test_invalid_table_raises(self):
        table = Table.matrix(["a"], ["x", "y"], [["1"]])
        with pytest.raises(InvalidTable):
            serialize_flat(table)


class TestParse:
    def test_attribute_value(self):
        table = parse_flat("Name | The Eagle<NEWLINE>Food | Japanese", Orientation.ATTRIBUTE_VALUE)
        assert table.rows == (("Name", "The Eagle"), ("Food", "Japanese"))

    def test_ragged_raises_with_widths(self):
        with pytest.raises(StructuralError) as excinfo:
            parse_flat("a | b | c<NEWLINE>d | e", Orientation.ATTRIBUTE_VALUE)
        assert excinfo.value.widths == [3, 2]

    def test_blank_raises_empty_input(self):
        with pytest.raises(EmptyInput):
            parse_flat("", Orientation.ATTRIBUTE_VALUE)
        with pytest.raises(EmptyInput):
            parse_flat("   ", Orientation.MATRIX)

    def test_whitespace_around_separator_tolerated(self):
        table = parse_flat("Name|The Eagle", Orientation.ATTRIBUTE_VALUE)
        assert table.rows == (("Name", "The Eagle"),)

    def test_matrix_corner_content_dropped(self):
        table = parse_flat("Team | Wins<NEWLINE>Suns | 46", Orientation.MATRIX)
        assert table.col_headers == ("Wins",)
        assert table.row_headers == ("Suns",)
        assert table.cells == (("46",),)

    def test_empty_cells_become_absent(self):
        table = parse_flat(" | Wins | Losses<NEWLINE>Hawks | 46 | ", Orientation.MATRIX)
        assert table.cells == (("46", None),)

    def test_duplicate_headers_suffixed(self):
        table = parse_flat("Name | a<NEWLINE>Name | b", Orientation.ATTRIBUTE_VALUE)
        assert [h for h, _ in table.rows] == ["Name", "Name #2"]

    def test_uniform_wide_rows_keep_extra_cells_in_value(self):
        table = parse_flat("a | b | c<NEWLINE>d | e | f", Orientation.ATTRIBUTE_VALUE)
        assert table.rows == (("a", "b | c"), ("d", "e | f"))

    def test_header_only_matrix(self):
        table = parse_flat(" | Wins | Losses", Orientation.MATRIX)
        assert table.col_headers == ("Wins", "Losses")
        assert table.row_headers == ()
        assert validate(table).valid


class TestRoundTrip:
    @given(attribute_tables())
    def test_attribute_value(self, table):
        assert parse_flat(serialize_flat(table), Orientation.ATTRIBUTE_VALUE) == table

    @given(matrix_tables())
    def test_matrix(self, table):
        assert parse_flat(serialize_flat(table), Orientation.MATRIX) == table


class TestToTuples:
    def test_wikibio_example(self, wikibio_sample):
        assert to_tuples(wikibio_sample.gold) == {
            CellTuple("", "debut team", "washington senators"),
            CellTuple("", "name", "lenny randle"),
            CellTuple("", "birth date", "12 february 1949"),
        }

    def test_all_absent_matrix_yields_empty_set(self):
        table = Table.matrix(["a"], ["x", "y"], [[None, None]])
        assert to_tuples(table) == set()

    def test_team_example_has_seven_tuples(self, rotowire_team_sample):
        # One of the eight slots (Hawks, points in 4th quarter) is absent.
        assert len(to_tuples(rotowire_team_sample.gold)) == 7

    def test_invalid_raises(self):
        with pytest.raises(InvalidTable):
            to_tuples(Table.matrix(["a"], ["x", "y"], [["1"]]))

    @given(st.one_of(attribute_tables(), matrix_tables()))
    def test_cardinality_matches_present_cells(self, table):
        assert len(to_tuples(table)) == table.present_cell_count()


class TestJson:
    @given(st.one_of(attribute_tables(), matrix_tables()))
    def test_round_trip(self, table):
        assert table_from_json(table_to_json(table)) == table

    def test_orientation_inferred_from_rows_key(self):
        table = table_from_json({"rows": [{"header": "Name", "value": "x"}]})
        assert table.orientation is Orientation.ATTRIBUTE_VALUE

    def test_rejects_non_object(self):
        with pytest.raises(ValueError):
            table_from_json([1, 2])

    def test_rejects_bad_orientation(self):
        with pytest.raises(ValueError):
            table_from_json({"orientation": "diagonal", "rows": []})

    def test_rejects_numeric_cells(self):
        data = {"orientation": "matrix", "row_headers": ["a"], "col_headers": ["x"], "cells": [[46]]}
        with pytest.raises(ValueError):
            table_from_json(data)

    def test_rejects_missing_rows(self):
        with pytest.raises(ValueError):
            table_from_json({"orientation": "attribute_value"})


class TestHeaderIssues:
    def test_clean_table_has_none(self, rotowire_team_sample):
        assert header_issues(rotowire_team_sample.gold) == []

    def test_reports_duplicates_and_empties(self):
        table = Table.attribute_value([("Name", "a"), ("name", "b"), ("  ", "c")])
        issues = header_issues(table)
        assert len(issues) == 2


class TestMarkdown:
    def test_attribute_value(self):
        table = Table.attribute_value([("Name", "The Eagle"), ("Near", None)])
        rendered = render_markdown(table)
        assert "| Name | The Eagle |" in rendered
        assert "| Near |  |" in rendered

    def test_matrix_escapes_pipes(self):
        table = Table.matrix(["a"], ["x"], [["v|w"]])
        assert "v\\|w" in render_markdown(table)

    def test_example_render(self, rotowire_team_sample):
        rendered = render_markdown(rotowire_team_sample.gold)
        assert rendered.splitlines()[0].count("|") == 6
