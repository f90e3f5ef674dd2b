//! Emits a standalone matplotlib script for a CSV table. Nothing is rendered here.

use crate::spec::RunSpec;
use crate::table::Table;

struct Layout {
    x: &'static str,
    ys: &'static [&'static str],
    groups: &'static [&'static str],
    log_y: bool,
}

fn layout(t: &Table) -> Layout {
    let has = |c: &str| t.columns.contains(&c);
    if has("nmse_analytic") {
        Layout { x: "snr_db", ys: &["nmse_analytic", "nmse_empirical"], groups: &["delta"], log_y: true }
    } else if has("outage_analytic") {
        Layout {
            x: "threshold_db",
            ys: &["outage_analytic", "outage_empirical"],
            groups: &["nt", "nr", "receiver", "delta"],
            log_y: true,
        }
    } else if has("rate_ceiling") {
        Layout {
            x: "snr_db",
            ys: &["rate_analytic", "rate_empirical", "rate_ceiling"],
            groups: &["receiver", "delta"],
            log_y: false,
        }
    } else if has("deviation_analytic") {
        Layout {
            x: "nr",
            ys: &["deviation_analytic", "deviation_empirical"],
            groups: &["snr_db", "receiver", "delta"],
            log_y: true,
        }
    } else if has("nt") {
        Layout { x: "snr_db", ys: &["tp_star"], groups: &["nt", "nr", "receiver", "delta"], log_y: false }
    } else {
        Layout { x: "snr_db", ys: &["tp_star"], groups: &["receiver", "delta"], log_y: false }
    }
}

fn py_list(items: &[&str]) -> String {
    let quoted: Vec<String> = items.iter().map(|s| format!("{s:?}")).collect();
    format!("[{}]", quoted.join(", "))
}

pub fn script(spec: &RunSpec, t: &Table) -> String {
    let l = layout(t);
    format!(
        r#"#!/usr/bin/env python3
# Plots {csv} (written by `rtri {cmd}`).
import sys
import pandas as pd
import matplotlib.pyplot as plt

df = pd.read_csv(sys.argv[1] if len(sys.argv) > 1 else "{csv}")
x, ys, groups = "{x}", {ys}, {groups}
fig, ax = plt.subplots()
for key, g in df.groupby(groups):
    key = key if isinstance(key, tuple) else (key,)
    label = ", ".join(f"{{k}}={{v}}" for k, v in zip(groups, key))
    for y in ys:
        if y in g and g[y].notna().any():
            ax.plot(g[x], g[y], "-" if y.endswith("analytic") or y == ys[0] else "o", label=f"{{y}} ({{label}})")
ax.set_xlabel(x)
{yscale}ax.grid(True, alpha=0.3)
ax.legend(fontsize="x-small")
fig.savefig("{name}.pdf", bbox_inches="tight")
"#,
        csv = format!("{}.csv", t.name),
        cmd = spec.command.as_str(),
        x = l.x,
        ys = py_list(l.ys),
        groups = py_list(l.groups),
        yscale = if l.log_y { "ax.set_yscale(\"log\")\n" } else { "" },
        name = t.name,
    )
}
