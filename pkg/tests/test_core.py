import os

import pytest

from isotower.core import (
    EXIT_BUDGET,
    EXIT_VALIDATION,
    EXIT_VERIFICATION,
    BudgetExceededError,
    FieldTooSmallError,
    InconsistentStructureError,
    ValidationError,
    VerificationError,
    check_budget,
    validate_output_path,
    validate_positive,
    validate_prime,
)
from isotower.utilities import (
    Settings,
    env_name,
    get_env_bool,
    get_env_int,
    load_settings,
    parse_bool,
    parse_int_list,
    run_ordered,
)


class TestErrors:
    def test_exit_codes(self):
        assert ValidationError.exit_code == EXIT_VALIDATION
        assert VerificationError.exit_code == EXIT_VERIFICATION
        assert InconsistentStructureError.exit_code == EXIT_VERIFICATION
        assert BudgetExceededError.exit_code == EXIT_BUDGET
        assert FieldTooSmallError.exit_code == EXIT_BUDGET

    def test_validate_prime(self):
        assert validate_prime(7, "l") == 7
        with pytest.raises(ValidationError):
            validate_prime(9, "l")
        with pytest.raises(ValidationError):
            validate_prime(True, "l")

    def test_validate_positive(self):
        assert validate_positive(0, "m", minimum=0) == 0
        with pytest.raises(ValidationError, match="m must be >= 1"):
            validate_positive(0, "m")

    def test_check_budget(self):
        check_budget(10, 10, "things")
        with pytest.raises(BudgetExceededError, match="things too large"):
            check_budget(11, 10, "things")

    def test_validate_output_path(self, tmp_path):
        assert validate_output_path(tmp_path / "out.json").name == "out.json"
        with pytest.raises(ValidationError):
            validate_output_path(tmp_path / "missing" / "out.json")
        with pytest.raises(ValidationError):
            validate_output_path(tmp_path)


class TestCommon:
    @pytest.mark.parametrize(
        "value, expected",
        [("yes", True), ("OFF", False), (" 1 ", True), ("maybe", None), (None, None), (False, False)],
    )
    def test_parse_bool(self, value, expected):
        assert parse_bool(value) is expected

    def test_env_name(self):
        assert env_name("max_degree") == "ISOTOWER_MAX_DEGREE"
        assert env_name("ISOTOWER_SEED") == "ISOTOWER_SEED"

    def test_parse_int_list(self):
        assert parse_int_list("1, 3,4") == [1, 3, 4]
        assert parse_int_list("") is None
        with pytest.raises(ValueError):
            parse_int_list("1,a")

    def test_env_helpers(self, monkeypatch):
        monkeypatch.setenv("ISOTOWER_TEST_INT", "12")
        monkeypatch.setenv("ISOTOWER_TEST_BAD", "twelve")
        monkeypatch.setenv("ISOTOWER_TEST_BOOL", "on")
        assert get_env_int("ISOTOWER_TEST_INT") == 12
        assert get_env_int("ISOTOWER_TEST_BAD", 3) == 3
        assert get_env_int("ISOTOWER_TEST_INT", 3, minimum=20) == 3
        assert get_env_int("test_int") == 12
        assert get_env_bool("ISOTOWER_TEST_BOOL") is True


class TestSettings:
    def test_defaults(self, monkeypatch):
        for name in [k for k in os.environ if k.startswith("ISOTOWER_")]:
            monkeypatch.delenv(name)
        assert load_settings() == Settings()

    def test_environment(self, monkeypatch):
        monkeypatch.setenv("ISOTOWER_MAX_DEGREE", "40")
        monkeypatch.setenv("ISOTOWER_JOBS", "-2")
        monkeypatch.setenv("ISOTOWER_SEED", "9")
        monkeypatch.setenv("ISOTOWER_PROGRESS", "yes")
        loaded = load_settings()
        assert loaded.max_degree == 40
        assert loaded.jobs == 1
        assert loaded.seed == 9
        assert loaded.progress is True

    def test_with_overrides_skips_none(self):
        base = Settings(seed=4)
        changed = base.with_overrides(seed=None, jobs=3)
        assert changed.seed == 4
        assert changed.jobs == 3


class TestRunOrdered:
    @pytest.mark.parametrize("jobs", [1, 4])
    def test_order_is_kept(self, jobs):
        items = list(range(20))
        assert run_ordered(lambda x: x * x, items, jobs=jobs) == [x * x for x in items]

    def test_worker_error_propagates(self):
        def boom(x):
            if x == 3:
                raise ValueError("bad item")
            return x

        with pytest.raises(ValueError, match="bad item"):
            run_ordered(boom, list(range(6)), jobs=3)
