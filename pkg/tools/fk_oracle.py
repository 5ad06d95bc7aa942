#!/usr/bin/env python3
"""High-precision oracle for the slider-crank finger chain.

Evaluates the closed-form chain (slider coordinate -> slider displacement ->
base length -> fingertip angle -> fingertip coordinates) with 50-digit
arithmetic, independently of the package implementation.  Used to generate
the frozen expected values in tests/; rerun after changing the default
geometry:

    python tools/fk_oracle.py
"""

import mpmath as mp

mp.mp.dps = 50

# Must mirror src/softgrip/data/geometry_default.json.
GEOM = {
    "r1": "120",
    "r2": "360",
    "e": "1200",
    "c": "175",
    "d": "420",
    "l": "420",
    "delta_x": "89",
    "delta_y": "20",
}

THETAS = ("-0.8", "-1.0", "-1.4", "-1.9")


def chain(theta):
    r1, r2 = mp.mpf(GEOM["r1"]), mp.mpf(GEOM["r2"])
    e, c = mp.mpf(GEOM["e"]), mp.mpf(GEOM["c"])
    d, leg = mp.mpf(GEOM["d"]), mp.mpf(GEOM["l"])
    dx, dy = mp.mpf(GEOM["delta_x"]), mp.mpf(GEOM["delta_y"])

    y_b = r1 * mp.cos(theta) + mp.sqrt(r2 ** 2 - r1 ** 2 * mp.sin(theta) ** 2)
    delta = e - c - y_b
    b = mp.sqrt(d ** 2 + delta ** 2)
    assert b <= 2 * leg, f"chain domain violated at theta={theta}"
    alpha = mp.asin(delta / b) + mp.acos(b / (2 * leg))
    assert 0 < alpha <= mp.pi / 2 + mp.mpf("1e-30")
    x_left = leg * mp.cos(alpha) - dx
    x_right = dx - leg * mp.cos(alpha)
    y_tip = leg * mp.sin(alpha) + dy
    return {
        "y_b": y_b,
        "delta": delta,
        "b": b,
        "alpha": alpha,
        "x_left": x_left,
        "x_right": x_right,
        "y_tip": y_tip,
    }


def main():
    print("# Frozen chain states for the default geometry (17 significant digits).")
    print("FROZEN_STATES = {")
    for s in THETAS:
        st = chain(mp.mpf(s))
        fields = ", ".join(
            f'"{k}": {mp.nstr(v, 17)}' for k, v in st.items()
        )
        print(f'    {s}: {{{fields}}},')
    print("}")

    open_state = chain(mp.mpf("-0.8"))
    closed_state = chain(mp.mpf("-1.4"))
    print()
    print("# Aperture window, compensation totals, slide surface height.")
    ap_open = open_state["x_right"] - open_state["x_left"]
    ap_closed = closed_state["x_right"] - closed_state["x_left"]
    print(f"APERTURE_OPEN = {mp.nstr(ap_open, 17)}")
    print(f"APERTURE_CLOSED = {mp.nstr(ap_closed, 17)}")
    print(f"ENVELOPE_FULL_CLOSE_COMP = {mp.nstr(closed_state['delta'] - open_state['delta'], 17)}")
    print(f"PINCH_FULL_CLOSE_COMP = {mp.nstr(open_state['y_tip'] - closed_state['y_tip'], 17)}")
    print(f"SLIDE_SURFACE_Y = {mp.nstr(chain(mp.mpf('-1.9'))['y_tip'], 17)}")


if __name__ == "__main__":
    main()
