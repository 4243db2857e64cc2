from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from xbound.rules import DEFAULT_RULES_TEXT, DEFAULT_TYPES, RulesError, compile_pattern, default_rules, load_rules, parse_rules


def test_default_sinks_cover_napi_value_family():
    rules, app = default_rules()
    for name in ("napi_get_value_int32", "napi_get_value_string_utf8", "napi_get_value_bool"):
        assert rules.sink_misuses(name) == ["M3"], name
    assert rules.sink_misuses("napi_create_string_utf8") == []
    assert len(app) == 7


def test_type_expansion_is_documented():
    rules, _ = default_rules()
    assert "napi_get_value_Int32()" in rules.expand("napi_get_value_#type#()")
    assert len(rules.expand("napi_get_value_#type#()")) == len(DEFAULT_TYPES)


@pytest.mark.parametrize("callee", [
    "info[0].ToString", "args[0].As<v8::String>", "Nan::To<v8::Object>", "value.ToLocalChecked",
    "args[1].Int32Value", "Buffer::Data", "v8::String::Cast",
])
def test_default_sinks_match_conversion_calls(callee):
    # callee text as the native frontend normalizes it ("->" becomes ".")
    assert default_rules()[0].sink_misuses(callee) == ["M3"]


@pytest.mark.parametrize("callee", ["napi_typeof", "napi_is_buffer", "Nan::Check", "args[0].IsNumber",
                                    "Buffer::HasInstance"])
def test_default_native_sanitizers(callee):
    assert default_rules()[0].is_native_sanitizer(callee)


def test_empty_file_is_an_error(tmp_path):
    p = tmp_path / "empty.rules"
    p.write_text("")
    with pytest.raises(RulesError, match="no native sinks"):
        load_rules(p)


def test_unknown_directive_names_its_line():
    with pytest.raises(RulesError, match=r":3: unknown directive 'sinq'"):
        parse_rules('# c\nsink native M3 "a()"\nsinq native M3 "b()"\n', "x.rules")


def test_bad_misuse_id_is_rejected():
    with pytest.raises(RulesError, match=":1:"):
        parse_rules('sink native M9 "a()"\n')


def test_type_variable_at_most_once():
    with pytest.raises(RulesError, match=":1:"):
        parse_rules('sink native M3 "#type#To#type#()"\n')


def test_custom_types_list_drives_expansion():
    rules, _ = parse_rules('types Widget, Gadget\nsink native M3 "get#type#()"\n')
    assert rules.sink_misuses("getWidget") == ["M3"]
    assert rules.sink_misuses("getInt32") == []


def test_approle_parsing():
    _, app = parse_rules('sink native M3 "a()"\napprole "exec(_, _, tracked)" sources req.body, req.params.*\n')
    assert app[0].api == "exec" and app[0].tracked == 2
    assert app[0].sources == ("req.body", "req.params.*")
    with pytest.raises(RulesError, match=":2:"):
        parse_rules('sink native M3 "a()"\napprole "exec(_, _)" sources req\n')


def test_default_text_round_trips_through_file(tmp_path):
    p = tmp_path / "d.rules"
    p.write_text(DEFAULT_RULES_TEXT, encoding="utf-8")
    assert load_rules(p) == default_rules()


_NAME = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,10}", fullmatch=True)


@given(_NAME, _NAME)
def test_literal_patterns_match_only_themselves(name, other):
    pat = compile_pattern(f"{name}()", DEFAULT_TYPES)
    assert pat.matches(name)
    if other != name:
        assert not pat.matches(other)


@given(st.sampled_from(DEFAULT_TYPES), _NAME)
def test_type_patterns_match_each_expansion(t, prefix):
    pat = compile_pattern(f"{prefix}#type#()", DEFAULT_TYPES)
    assert pat.matches(prefix + t)
    assert not pat.matches(prefix + "Nope")
