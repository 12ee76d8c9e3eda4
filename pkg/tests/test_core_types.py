import itertools
import random

import pytest

from loralink.core_types import (
    BW_HZ_VALUES,
    CR_NUMERATORS,
    SF_VALUES,
    CodingRate,
    GridValidationError,
    LinkParams,
    RadioConfig,
    SignalSample,
    config_from_text,
    config_to_text,
    format_decimal,
    hz_to_khz_str,
    khz_str_to_hz,
    validate_measurement_grid,
)


def make_config(sf=8, bw_hz=62500, cr=CodingRate(4, 8), pt=20.0, f=433e6):
    return RadioConfig(sf=sf, bw_hz=bw_hz, cr=cr, tx_power_dbm=pt, freq_hz=f)


class TestCodingRate:
    def test_notation_is_preserved(self):
        cr = CodingRate(4, 8)
        assert str(cr) == "4/8"
        assert cr.ratio == 0.5
        assert cr != CodingRate(1, 2)  # notation-exact equality

    def test_parse_round_trip(self):
        for num in CR_NUMERATORS:
            assert CodingRate.parse(f"{num}/8") == CodingRate(num, 8)

    @pytest.mark.parametrize("text", ["4", "4/", "/8", "a/8", "4/8/8"])
    def test_parse_rejects_malformed(self, text):
        with pytest.raises(ValueError):
            CodingRate.parse(text)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            CodingRate(0, 8)
        with pytest.raises(ValueError):
            CodingRate(4, 0)


class TestInvariants:
    def test_radio_config_rejects_bad_fields(self):
        with pytest.raises(ValueError):
            make_config(sf=0)
        with pytest.raises(ValueError):
            make_config(bw_hz=0)
        with pytest.raises(ValueError):
            make_config(f=0)
        with pytest.raises(ValueError):
            make_config(pt=float("inf"))

    def test_freeform_config_is_constructible(self):
        # off-grid values are allowed at construction; only the grid check rejects them
        make_config(sf=6, bw_hz=130000)

    def test_link_params_defaults_and_checks(self):
        params = LinkParams()
        assert params.distance_m == 5000.0
        assert params.gt_dbi == params.gr_dbi == 5.15
        assert params.c_mps == 3.0e8
        assert params.rssi_offset_db == 157.0
        with pytest.raises(ValueError):
            LinkParams(distance_m=0)
        with pytest.raises(ValueError):
            LinkParams(rssi_offset_db=0)

    def test_signal_sample_requires_finite(self):
        with pytest.raises(ValueError):
            SignalSample(float("nan"), 5.0)
        with pytest.raises(ValueError):
            SignalSample(-100.0, float("inf"))


class TestMeasurementGrid:
    def test_accepts_all_144_grid_combinations(self):
        combos = list(itertools.product(SF_VALUES, BW_HZ_VALUES, CR_NUMERATORS))
        assert len(combos) == 144
        for sf, bw, num in combos:
            validate_measurement_grid(make_config(sf=sf, bw_hz=bw, cr=CodingRate(num, 8)))

    def test_rejects_sf_off_grid(self):
        with pytest.raises(GridValidationError) as excinfo:
            validate_measurement_grid(make_config(sf=6))
        assert excinfo.value.field == "sf"
        assert "sf=6" in str(excinfo.value)

    def test_rejects_bw_off_grid(self):
        with pytest.raises(GridValidationError) as excinfo:
            validate_measurement_grid(make_config(bw_hz=130000))
        assert excinfo.value.field == "bw_hz"

    def test_rejects_cr_off_grid(self):
        with pytest.raises(GridValidationError) as excinfo:
            validate_measurement_grid(make_config(cr=CodingRate(3, 8)))
        assert excinfo.value.field == "cr"
        with pytest.raises(GridValidationError):
            validate_measurement_grid(make_config(cr=CodingRate(1, 2)))

    def test_rejects_single_field_perturbations_of_every_grid_point(self):
        for sf, bw, num in itertools.product(SF_VALUES, BW_HZ_VALUES, CR_NUMERATORS):
            with pytest.raises(GridValidationError):
                validate_measurement_grid(make_config(sf=13, bw_hz=bw, cr=CodingRate(num, 8)))
            with pytest.raises(GridValidationError):
                validate_measurement_grid(make_config(sf=sf, bw_hz=bw + 1, cr=CodingRate(num, 8)))
            with pytest.raises(GridValidationError):
                validate_measurement_grid(make_config(sf=sf, bw_hz=bw, cr=CodingRate(8, 8)))

    def test_tx_power_and_frequency_are_unconstrained(self):
        validate_measurement_grid(make_config(pt=-3.5, f=868e6))


class TestDecimalRendering:
    @pytest.mark.parametrize(
        "value,expected",
        [(20.0, "20"), (5.15, "5.15"), (10.4, "10.4"), (0.0, "0"),
         (-92.8, "-92.8"), (1e-07, "0.0000001"), (16.6, "16.6")],
    )
    def test_format_decimal(self, value, expected):
        assert format_decimal(value) == expected

    def test_khz_conversion_is_exact(self):
        assert hz_to_khz_str(10400) == "10.4"
        assert hz_to_khz_str(500000) == "500"
        assert khz_str_to_hz("10.4") == 10400
        assert khz_str_to_hz("62.5") == 62500
        assert isinstance(khz_str_to_hz("125"), int)

    def test_khz_rejects_garbage(self):
        with pytest.raises(ValueError):
            khz_str_to_hz("ten")
        with pytest.raises(ValueError):
            khz_str_to_hz("-10")


class TestCanonicalTextForm:
    def test_example_rendering(self):
        config = make_config(sf=8, bw_hz=62500, pt=20.0, f=433e6)
        assert config_to_text(config) == "sf=8,bw_khz=62.5,cr=4/8,pt_dbm=20,f_mhz=433"

    def test_narrow_band_rendering_has_no_float_residue(self):
        config = make_config(bw_hz=10400)
        assert "bw_khz=10.4" in config_to_text(config)

    def test_round_trip_over_the_grid(self):
        rng = random.Random(2024)
        for sf, bw, num in itertools.product(SF_VALUES, BW_HZ_VALUES, CR_NUMERATORS):
            config = make_config(
                sf=sf, bw_hz=bw, cr=CodingRate(num, 8),
                pt=round(rng.uniform(-5, 22), 2), f=rng.choice([433e6, 868e6, 915e6]),
            )
            assert config_from_text(config_to_text(config)) == config

    def test_round_trip_awkward_decimals(self):
        config = make_config(pt=13.370000000000001, f=433.15e6)
        parsed = config_from_text(config_to_text(config))
        assert parsed.tx_power_dbm == config.tx_power_dbm
        assert parsed.freq_hz == config.freq_hz

    @pytest.mark.parametrize(
        "text",
        [
            "sf=8,bw_khz=62.5,cr=4/8,pt_dbm=20",  # missing field
            "sf=8,bw_khz=62.5,cr=4/8,pt_dbm=20,f_mhz=433,bogus=1",  # extra field
            "sf=eight,bw_khz=62.5,cr=4/8,pt_dbm=20,f_mhz=433",
            "sf=8;bw_khz=62.5",
        ],
    )
    def test_parse_rejects_malformed(self, text):
        with pytest.raises(ValueError):
            config_from_text(text)
