use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{measure_value, render_svg, to_csv, Panel, Series, VERSION};
use crate::error::Error;
use crate::measures::{
    evaluate_point, MeasureOptions, MeasurePoint, MeasureSet, Slice, DEFAULT_RICHARDSON, LIMIT_OFFSET, RFS_DRIFT_TOL,
};
use crate::numerics::{DOMINANT_TOL, HERMITIAN_TOL, PSD_CLIP_TOL};
use crate::transfer::DENSITY_TOL;

use super::{format_float, RunError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub slice: Slice,
    pub preset: Option<String>,
    pub a_min: f64,
    pub a_max: f64,
    pub a_steps: usize,
    pub options: MeasureOptions,
    pub out_dir: PathBuf,
    /// File name without extension.
    pub stem: String,
    pub format: OutputFormat,
    pub svg: bool,
    /// Worker threads; 0 uses the global pool.
    pub threads: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), RunError> {
        let usage = |m: String| Err(RunError::Usage(m));
        if self.a_steps < 2 {
            return usage(format!("a-steps must be at least 2, got {}", self.a_steps));
        }
        if !(self.a_min.is_finite() && self.a_max.is_finite() && self.a_min < self.a_max) {
            return usage(format!("need a-min < a-max, got {} and {}", self.a_min, self.a_max));
        }
        if !(self.options.delta.is_finite() && self.options.delta != 0.0) {
            return usage(format!("delta must be non-zero, got {}", self.options.delta));
        }
        if !(self.options.h.is_finite() && self.options.h > 0.0) {
            return usage(format!("h must be positive, got {}", self.options.h));
        }
        if !(self.slice.x.is_finite() && self.slice.gamma.is_finite() && self.options.theta.is_finite()) {
            return usage("x, gamma and theta must be finite".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.a_steps - 1;
        (0..=n)
            .map(|i| if i == n { self.a_max } else { self.a_min + (self.a_max - self.a_min) * i as f64 / n as f64 })
            .collect()
    }

    /// Contents of the `#` header line.
    pub fn header_comment(&self) -> String {
        let o = &self.options;
        format!(
            "spin2mps {VERSION} preset={} x={} gamma={} a_min={} a_max={} a_steps={} delta={} h={} theta={} string_r={} \
             measures={} tol: hermitian={} dominant={} psd_clip={} density={} rfs_drift={} richardson_levels={} limit_offset={}",
            self.preset.as_deref().unwrap_or("none"),
            format_float(self.slice.x),
            format_float(self.slice.gamma),
            format_float(self.a_min),
            format_float(self.a_max),
            self.a_steps,
            format_float(o.delta),
            format_float(o.h),
            format_float(o.theta),
            o.string_r,
            o.measures.names().join("+"),
            format_float(HERMITIAN_TOL),
            format_float(DOMINANT_TOL),
            format_float(PSD_CLIP_TOL),
            format_float(DENSITY_TOL),
            format_float(RFS_DRIFT_TOL),
            DEFAULT_RICHARDSON,
            format_float(LIMIT_OFFSET),
        )
    }
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub points: Vec<MeasurePoint>,
}

/// Evaluates every grid point, in parallel up to `config.threads`, with
/// rows in ascending `a`.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutput, RunError> {
    config.validate()?;
    let grid = config.grid();
    let eval = || -> Result<Vec<MeasurePoint>, (f64, Error)> {
        grid.par_iter().map(|&a| evaluate_point(config.slice, a, &config.options).map_err(|e| (a, e))).collect()
    };
    let points = if config.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| RunError::Io(format!("thread pool: {e}")))?
            .install(eval)
    } else {
        eval()
    }
    .map_err(|(a, e)| RunError::Numerical { op: format!("evaluate_point(a = {a:e})"), source: e })?;
    Ok(SweepOutput { points })
}

fn to_json(config: &SweepConfig, points: &[MeasurePoint]) -> String {
    let value = serde_json::json!({
        "version": VERSION,
        "header": config.header_comment(),
        "slice": config.slice,
        "records": points,
    });
    let mut s = serde_json::to_string_pretty(&value).expect("serializable");
    s.push('\n');
    s
}

const PLOT_ORDER: [(&str, &str); 12] = [
    ("S", "S (bits)"),
    ("d2S_da2", "d2S/da2"),
    ("dS_da", "dS/da"),
    ("F_R", "F_R"),
    ("RFS_fd", "RFS (fixed delta)"),
    ("RFS_d2", "RFS (second derivative)"),
    ("fps", "fidelity per site"),
    ("xi_long", "xi_long"),
    ("xi_trans", "xi_trans"),
    ("string_order", "string order"),
    ("fluct_zz", "(dSz)^2"),
    ("lambda1", "lambda1"),
];

fn panel(points: &[MeasurePoint], col: &str, label: &str, title: String) -> Panel {
    Panel {
        title,
        xlabel: "a".into(),
        ylabel: label.into(),
        series: vec![Series {
            label: label.into(),
            points: points.iter().filter_map(|p| measure_value(p, col).map(|v| (p.a, v))).collect(),
        }],
    }
}

/// Files written so far; removed again if a later step fails.
struct Written(Vec<PathBuf>);

impl Written {
    fn write(&mut self, path: PathBuf, contents: &str) -> Result<(), RunError> {
        fs::write(&path, contents).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        self.0.push(path);
        Ok(())
    }

    fn cleanup(&mut self) {
        for p in self.0.drain(..) {
            let _ = fs::remove_file(p);
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(|e| RunError::Io(format!("{}: {e}", dir.display())))
}

/// Writes the data file (and SVG if requested); returns the paths written.
pub fn write_sweep(config: &SweepConfig, out: &SweepOutput) -> Result<Vec<PathBuf>, RunError> {
    ensure_dir(&config.out_dir)?;
    let mut written = Written(Vec::new());
    let result = (|| {
        let data = match config.format {
            OutputFormat::Csv => to_csv(&config.header_comment(), &out.points),
            OutputFormat::Json => to_json(config, &out.points),
        };
        let path = config.out_dir.join(format!("{}.{}", config.stem, config.format.extension()));
        written.write(path, &data)?;
        if config.svg {
            let present: Vec<_> =
                PLOT_ORDER.iter().filter(|(c, _)| out.points.iter().any(|p| measure_value(p, c).is_some())).collect();
            let title = format!("x = {}, gamma = {}", config.slice.x, config.slice.gamma);
            let main = present.first().map(|(c, l)| panel(&out.points, c, l, title.clone()));
            let inset = present.get(1).map(|(c, l)| panel(&out.points, c, l, l.to_string()));
            if let Some(main) = main {
                let svg = render_svg(&main, inset.as_ref());
                written.write(config.out_dir.join(format!("{}.svg", config.stem)), &svg)?;
            }
        }
        Ok(())
    })();
    match result {
        Ok(()) => Ok(written.0),
        Err(e) => {
            written.cleanup();
            Err(e)
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FigureSpec {
    pub name: &'static str,
    pub slice: Slice,
    pub preset: &'static str,
    pub measures: MeasureSet,
    pub main: (&'static str, &'static str),
    pub inset: (&'static str, &'static str),
}

const ENTROPY: MeasureSet = MeasureSet { entropy: true, dde: true, ..MeasureSet::NONE };
const FIDELITY: MeasureSet = MeasureSet { rf: true, rfs: true, ..MeasureSet::NONE };

/// Entropy with its second derivative, then fidelity with its susceptibility,
/// each on both slices over `a` in `[0, 4]`.
pub const FIGURES: [FigureSpec; 4] = [
    FigureSpec {
        name: "fig1",
        slice: Slice::ACRITICAL,
        preset: "acritical",
        measures: ENTROPY,
        main: ("S", "S (bits)"),
        inset: ("d2S_da2", "d2S/da2"),
    },
    FigureSpec {
        name: "fig2",
        slice: Slice::CRITICAL,
        preset: "critical",
        measures: ENTROPY,
        main: ("S", "S (bits)"),
        inset: ("d2S_da2", "d2S/da2"),
    },
    FigureSpec {
        name: "fig3",
        slice: Slice::ACRITICAL,
        preset: "acritical",
        measures: FIDELITY,
        main: ("RFS_fd", "RFS"),
        inset: ("F_R", "F_R"),
    },
    FigureSpec {
        name: "fig4",
        slice: Slice::CRITICAL,
        preset: "critical",
        measures: FIDELITY,
        main: ("RFS_fd", "RFS"),
        inset: ("F_R", "F_R"),
    },
];

pub const FIGURE_A_MAX: f64 = 4.0;
pub const FIGURE_STEPS: usize = 401;

/// Writes `fig1..fig4` as CSV plus SVG into `out_dir`. Nothing is left
/// behind if any figure fails.
pub fn run_figures(out_dir: &Path, base: &MeasureOptions, threads: usize) -> Result<Vec<PathBuf>, RunError> {
    ensure_dir(out_dir)?;
    let mut written = Written(Vec::new());
    let result = (|| {
        for fig in FIGURES {
            let config = SweepConfig {
                slice: fig.slice,
                preset: Some(fig.preset.into()),
                a_min: 0.0,
                a_max: FIGURE_A_MAX,
                a_steps: FIGURE_STEPS,
                options: MeasureOptions { measures: fig.measures, ..*base },
                out_dir: out_dir.to_path_buf(),
                stem: fig.name.into(),
                format: OutputFormat::Csv,
                svg: true,
                threads,
            };
            let out = run_sweep(&config)?;
            let csv = to_csv(&format!("{} {}", fig.name, config.header_comment()), &out.points);
            written.write(out_dir.join(format!("{}.csv", fig.name)), &csv)?;
            let title = format!("{} ({} slice)", fig.main.1, fig.preset);
            let main = panel(&out.points, fig.main.0, fig.main.1, title);
            let inset = panel(&out.points, fig.inset.0, fig.inset.1, fig.inset.1.into());
            written.write(out_dir.join(format!("{}.svg", fig.name)), &render_svg(&main, Some(&inset)))?;
        }
        Ok(())
    })();
    match result {
        Ok(()) => Ok(written.0),
        Err(e) => {
            written.cleanup();
            Err(e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::{column, parse_csv};

    fn config(dir: &Path) -> SweepConfig {
        SweepConfig {
            slice: Slice::CRITICAL,
            preset: Some("critical".into()),
            a_min: 0.0,
            a_max: 2.0,
            a_steps: 9,
            options: MeasureOptions::default(),
            out_dir: dir.to_path_buf(),
            stem: "sweep".into(),
            format: OutputFormat::Csv,
            svg: true,
            threads: 3,
        }
    }

    #[test]
    fn grid_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = config(dir.path());
        assert_eq!(c.grid(), vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0]);
        c.a_steps = 1;
        assert!(matches!(c.validate(), Err(RunError::Usage(_))));
        c.a_steps = 5;
        c.a_max = -1.0;
        assert!(matches!(c.validate(), Err(RunError::Usage(_))));
    }

    #[test]
    fn sweep_is_ordered_and_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(dir.path());
        let out = run_sweep(&c).unwrap();
        assert!(out.points.windows(2).all(|w| w[0].a < w[1].a));
        assert!(out.points[0].limit_flag && !out.points[1].limit_flag);
        let files = write_sweep(&c, &out).unwrap();
        assert_eq!(files.len(), 2);
        let first = fs::read(&files[0]).unwrap();

        let single = SweepConfig { threads: 1, ..c.clone() };
        write_sweep(&single, &run_sweep(&single).unwrap()).unwrap();
        assert_eq!(fs::read(&files[0]).unwrap(), first);

        let rows = parse_csv(&String::from_utf8(first).unwrap()).unwrap();
        assert_eq!(rows.len(), 9);
        assert!(column(&rows, "S").iter().all(|v| v.is_some()));
    }

    #[test]
    fn json_output() {
        let dir = tempfile::tempdir().unwrap();
        let c = SweepConfig { format: OutputFormat::Json, svg: false, a_steps: 3, ..config(dir.path()) };
        let files = write_sweep(&c, &run_sweep(&c).unwrap()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&files[0]).unwrap()).unwrap();
        assert_eq!(v["records"].as_array().unwrap().len(), 3);
        assert_eq!(v["records"][0]["limit_flag"], true);
    }

    #[test]
    fn failed_write_removes_partial_files() {
        let dir = tempfile::tempdir().unwrap();
        let c = SweepConfig { a_steps: 3, ..config(dir.path()) };
        // a directory where the plot should go makes the second write fail
        fs::create_dir(dir.path().join("sweep.svg")).unwrap();
        let out = run_sweep(&c).unwrap();
        assert!(matches!(write_sweep(&c, &out), Err(RunError::Io(_))));
        assert!(!dir.path().join("sweep.csv").exists());
    }
}
