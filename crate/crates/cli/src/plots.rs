//! Plot descriptions as standalone matplotlib scripts next to their CSV data.
//! Rendering is left to the user: `python3 plot_*.py` writes a PNG beside it.

use crate::io::write_text;
use crate::CliError;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axes {
    LogLog,
    LinLin,
    /// log y against linear x
    SemiLogY,
}

/// One curve: column names in the CSV and a legend label.
pub struct Series<'a> {
    pub x: &'a str,
    pub y: &'a str,
    pub label: &'a str,
    /// plot |y| (needed on log axes for signed data)
    pub abs: bool,
}

pub struct Figure<'a> {
    pub csv: &'a str,
    pub title: &'a str,
    pub xlabel: &'a str,
    pub ylabel: &'a str,
    pub axes: Axes,
    pub series: Vec<Series<'a>>,
    /// keep rows with x inside this range (positive half-line for tails)
    pub x_range: Option<[f64; 2]>,
}

fn py_str(s: &str) -> String {
    format!("{s:?}")
}

impl Figure<'_> {
    pub fn script(&self, png: &str) -> String {
        let mut s = String::new();
        s.push_str("import csv\nimport matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\nfrom pathlib import Path\n\n");
        s.push_str("here = Path(__file__).resolve().parent\n");
        s.push_str(&format!("with open(here / {}, newline=\"\") as fh:\n    rows = list(csv.DictReader(fh))\n\n", py_str(self.csv)));
        s.push_str("fig, ax = plt.subplots(figsize=(6, 4.5))\n");
        for se in &self.series {
            s.push_str(&format!("pts = [(float(r[{}]), float(r[{}])) for r in rows]\n", py_str(se.x), py_str(se.y)));
            if let Some([lo, hi]) = self.x_range {
                s.push_str(&format!("pts = [p for p in pts if {lo:?} <= p[0] <= {hi:?}]\n"));
            }
            if se.abs {
                s.push_str("pts = [(x, abs(y)) for x, y in pts]\n");
            }
            if self.axes != Axes::LinLin {
                s.push_str("pts = [(x, y) for x, y in pts if y > 0]\n");
            }
            if self.axes == Axes::LogLog {
                s.push_str("pts = [(x, y) for x, y in pts if x > 0]\n");
            }
            s.push_str(&format!("ax.plot([p[0] for p in pts], [p[1] for p in pts], label={})\n", py_str(se.label)));
        }
        match self.axes {
            Axes::LogLog => s.push_str("ax.set_xscale(\"log\")\nax.set_yscale(\"log\")\n"),
            Axes::SemiLogY => s.push_str("ax.set_yscale(\"log\")\n"),
            Axes::LinLin => {}
        }
        s.push_str(&format!(
            "ax.set_xlabel({})\nax.set_ylabel({})\nax.set_title({})\nax.legend()\nfig.tight_layout()\nfig.savefig(here / {}, dpi=150)\n",
            py_str(self.xlabel),
            py_str(self.ylabel),
            py_str(self.title),
            py_str(png)
        ));
        s
    }

    /// Writes `plot_<stem>.py` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<(), CliError> {
        write_text(&dir.join(format!("plot_{stem}.py")), &self.script(&format!("{stem}.png")))
    }
}
