"""
Gnuplot script emission.

Scripts reference the CSV files by name (relative to the script), skip the
comment header and take titles from the column-header row.
"""

from typing import Sequence

PREAMBLE = """\
set datafile separator ","
set datafile commentschars "#"
set key autotitle columnhead
set grid
"""


def _hline(value: float, label: str, style: int) -> str:
    return f"{value:.6g} with lines dashtype 2 linecolor {style} title '{label}'"


def histogram_script(csv_name: str, s_max: float, title: str) -> str:
    """Relative frequency of local entropies with the S_max marker."""
    return (
        PREAMBLE
        + f"set title '{title}'\n"
        + "set xlabel 'S [k_B]'\n"
        + "set ylabel 'relative frequency'\n"
        + "set style fill solid 0.5\n"
        + f"set arrow from {s_max:.6g}, graph 0 to {s_max:.6g}, graph 1 nohead dashtype 2\n"
        + f"set label 'S_max = {s_max:.3f}' at {s_max:.6g}, graph 0.95 right offset -1,0\n"
        + f"plot '{csv_name}' using 3:4 with boxes notitle\n"
    )


def evolve_script(
    csv_names: Sequence[str],
    n_levels: int,
    s_max: float,
    dominant: Sequence[float],
    title: str,
) -> str:
    """
    Two panels: gas occupations and local entropy against time.

    Theory plateaus (dominant weights, S_max) are drawn as dashed lines.
    """
    occupations = []
    entropies = []
    for name in csv_names:
        for level in range(n_levels):
            occupations.append(f"'{name}' using 1:{level + 2} with lines")
        entropies.append(f"'{name}' using 1:{n_levels + 3} with lines")
    occupations += [_hline(w, f"W^d_{i}", i + 1) for i, w in enumerate(dominant)]
    entropies.append(_hline(s_max, "S_max", 1))

    return (
        PREAMBLE
        + "set multiplot layout 2,1 title '" + title + "'\n"
        + "set xlabel 't [hbar/dE]'\n"
        + "set ylabel 'W^g_A'\n"
        + "plot " + ", \\\n     ".join(occupations) + "\n"
        + "set ylabel 'S^g [k_B]'\n"
        + "plot " + ", \\\n     ".join(entropies) + "\n"
        + "unset multiplot\n"
    )


def sweep_script(points_csv: str, coefficient: float, exponent: float, fixed_coefficient: float, title: str) -> str:
    """Log-log fluctuation scaling with the free and fixed-exponent fits."""
    return (
        PREAMBLE
        + f"set title '{title}'\n"
        + "set logscale xy\n"
        + "set xlabel 'N^c_1'\n"
        + "set ylabel 'Delta_t W^g_0'\n"
        + f"free(x) = sqrt({coefficient:.6g} / x**(2*{exponent:.6g}))\n"
        + f"fixed(x) = sqrt({fixed_coefficient:.6g} / x)\n"
        + f"plot '{points_csv}' using 1:2:3 with yerrorbars title 'simulation', \\\n"
        + f"     free(x) title sprintf('fit p=%.3f', {exponent:.6g}), \\\n"
        + "     fixed(x) dashtype 2 title 'p = 1/2'\n"
    )
