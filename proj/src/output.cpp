#include "qshare/output.hpp"

#include "qshare/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace qshare {

namespace {

const Mat& channel(const TimeSeries& ts, const std::string& name) {
    if (name == "theta") return ts.theta;
    if (name == "omega_dev") return ts.omega_dev;
    if (name == "f") return ts.f;
    if (name == "v") return ts.v;
    if (name == "lambda") return ts.lambda;
    if (name == "zeta") return ts.zeta;
    if (name == "V") return ts.V;
    if (name == "P") return ts.P;
    if (name == "Q") return ts.Q;
    if (name == "P_ratio") return ts.P_ratio;
    if (name == "Q_ratio") return ts.Q_ratio;
    if (name == "rho") return ts.rho;
    throw ModelError("unknown output channel '" + name + "'");
}

void put(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

}  // namespace

void write_csv(std::ostream& os, const TimeSeries& ts, const std::vector<std::string>& channels) {
    const auto& names = channels.empty() ? channel_names() : channels;
    std::vector<const Mat*> mats;
    for (const auto& n : names) mats.push_back(&channel(ts, n));

    std::string line = "t,ibr";
    for (const auto& n : names) line += "," + n;
    os << line << '\n';
    const auto n_ibr = ts.ibr_count();
    for (std::size_t k = 0; k < ts.samples(); ++k) {
        for (std::size_t i = 0; i < n_ibr; ++i) {
            line.clear();
            put(line, ts.t[k]);
            line += ',';
            line += std::to_string(i + 1);
            for (const Mat* m : mats) {
                line += ',';
                put(line, (*m)(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)));
            }
            line += '\n';
            os << line;
        }
    }
}

std::string plot_script(const std::string& csv_file, const std::string& title) {
    std::ostringstream os;
    os << R"PY(#!/usr/bin/env python3
"""Plots a qshare simulation CSV. Usage: python3 plot.py [csv] [out.png]"""
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

csv = sys.argv[1] if len(sys.argv) > 1 else ")PY" << csv_file << R"PY("
out = sys.argv[2] if len(sys.argv) > 2 else csv.rsplit(".", 1)[0] + ".png"
df = pd.read_csv(csv)

panels = [
    ("Q_ratio", "Q / S_rated"),
    ("V", "V [p.u.]"),
    ("lambda", "lambda"),
    ("v", "v [p.u.]"),
    ("zeta", "zeta"),
    ("rho", "rho(v)"),
    ("P_ratio", "P / S_rated"),
    ("f", "f [Hz]"),
]
fig, axes = plt.subplots(4, 2, figsize=(12, 12), sharex=True)
for ax, (col, label) in zip(axes.ravel(), panels):
    if col not in df:
        ax.set_visible(False)
        continue
    for ibr, g in df.groupby("ibr"):
        ax.plot(g["t"], g[col], label=f"IBR {ibr}", lw=1)
    ax.set_ylabel(label)
    ax.grid(True, alpha=0.3)
for ax in axes[-1]:
    ax.set_xlabel("t [s]")
axes[0][0].legend(fontsize=8)
fig.suptitle(")PY" << title << R"PY(")
fig.tight_layout()
fig.savefig(out, dpi=120)
print(out)
)PY";
    return os.str();
}

}  // namespace qshare
