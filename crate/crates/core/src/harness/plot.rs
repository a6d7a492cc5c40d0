/// Standalone matplotlib script that draws per-fraction mean curves with
/// standard-deviation bands for every metric column of a sweep CSV.
pub fn sweep_plot_script(csv_path: &str) -> String {
    SWEEP_TEMPLATE.replace("{CSV}", &python_string(csv_path))
}

/// Standalone matplotlib script comparing each method's true ratio with its
/// certificate, per planted outlier count.
pub fn bound_plot_script(csv_path: &str) -> String {
    BOUND_TEMPLATE.replace("{CSV}", &python_string(csv_path))
}

fn python_string(s: &str) -> String {
    format!("{s:?}")
}

const SWEEP_TEMPLATE: &str = r#"#!/usr/bin/env python3
import csv
import math
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {CSV}
metrics = ["rotation_error", "translation_error", "tpr", "fpr", "chi", "wall_time"]
cells = defaultdict(lambda: defaultdict(list))
with open(path, newline="") as f:
    for row in csv.DictReader(f):
        key = (row["method"], float(row["outlier_fraction"]))
        for m in metrics:
            if row[m] != "":
                cells[key][m].append(float(row[m]))

methods = sorted({k[0] for k in cells})
fig, axes = plt.subplots(2, 3, figsize=(14, 8))
for ax, metric in zip(axes.flat, metrics):
    for method in methods:
        xs, mean, std = [], [], []
        for (meth, frac), cols in sorted(cells.items()):
            vals = [v for v in cols.get(metric, []) if math.isfinite(v)]
            if meth != method or not vals:
                continue
            mu = sum(vals) / len(vals)
            var = sum((v - mu) ** 2 for v in vals) / max(len(vals) - 1, 1)
            xs.append(100 * frac)
            mean.append(mu)
            std.append(math.sqrt(var))
        if not xs:
            continue
        ax.plot(xs, mean, marker="o", label=method)
        ax.fill_between(xs, [m - s for m, s in zip(mean, std)], [m + s for m, s in zip(mean, std)], alpha=0.2)
    ax.set_title(metric)
    ax.set_xlabel("outliers [%]")
    if metric in ("rotation_error", "translation_error", "chi", "wall_time"):
        ax.set_yscale("log")
    ax.legend()
fig.tight_layout()
out = path.rsplit(".", 1)[0] + ".png"
fig.savefig(out, dpi=150)
print(out)
"#;

const BOUND_TEMPLATE: &str = r#"#!/usr/bin/env python3
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {CSV}
ratio = defaultdict(list)
chi = defaultdict(list)
with open(path, newline="") as f:
    for row in csv.DictReader(f):
        key = (row["method"], int(row["planted"]))
        ratio[key].append(float(row["ratio_k"]))
        chi[key].append(float(row["chi"]))

methods = sorted({k[0] for k in ratio})
fig, axes = plt.subplots(1, len(methods), figsize=(6 * len(methods), 4), squeeze=False)
for ax, method in zip(axes[0], methods):
    keys = sorted(k for k in ratio if k[0] == method)
    xs = [k[1] for k in keys]
    ax.plot(xs, [sum(ratio[k]) / len(ratio[k]) for k in keys], "b-o", label="true ratio")
    ax.plot(xs, [sum(chi[k]) / len(chi[k]) for k in keys], "r-s", label="chi")
    ax.set_yscale("symlog", linthresh=1e-6)
    ax.set_xlabel("planted outliers")
    ax.set_title(method)
    ax.legend()
fig.tight_layout()
out = path.rsplit(".", 1)[0] + ".png"
fig.savefig(out, dpi=150)
print(out)
"#;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripts_embed_the_csv_path() {
        let s = sweep_plot_script("out/run \"a\".csv");
        assert!(s.contains(r#""out/run \"a\".csv""#));
        assert!(s.starts_with("#!/usr/bin/env python3"));
        assert!(bound_plot_script("b.csv").contains("\"b.csv\""));
    }
}
