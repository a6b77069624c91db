use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::args::{Command, RunSettings};
use crate::error::CliError;

/// Resolved inputs of one run; enough to reproduce its outputs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub run: RunSettings,
    pub command: Command,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
    }
}

/// Output directory that remembers every file written to it.
pub struct Sink {
    dir: PathBuf,
    written: Vec<String>,
}

impl Sink {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    /// Stream into `name` through `fill`.
    pub fn write_with<F>(&mut self, name: &str, fill: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
    {
        let path = self.dir.join(name);
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut out = BufWriter::new(file);
        fill(&mut out)?;
        out.flush().map_err(|e| CliError::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        self.write_with(name, |w| w.write_all(text.as_bytes()).map_err(CliError::from))
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Invalid(e.to_string()))?;
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn finish(mut self, stem: &str, run: &RunSettings, command: &Command) -> Result<(), CliError> {
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            run: run.clone(),
            command: command.clone(),
            outputs: self.written.clone(),
        };
        self.write_json(&format!("{stem}.manifest.json"), &manifest)
    }
}

/// Plain gnuplot command file reading named CSV columns.
pub struct PlotScript {
    csv: String,
    lines: Vec<String>,
    panels: Vec<String>,
}

impl PlotScript {
    pub fn new(csv: &str, title: &str) -> Self {
        Self {
            csv: csv.to_string(),
            lines: vec![
                "set datafile separator ','".into(),
                "set datafile missing 'nan'".into(),
                "set key autotitle columnhead".into(),
                format!("set title '{title}'"),
            ],
            panels: Vec::new(),
        }
    }

    pub fn layout(mut self, rows: usize, cols: usize) -> Self {
        self.lines.push(format!("set multiplot layout {rows},{cols}"));
        self
    }

    /// One panel with y columns against x.
    pub fn panel(mut self, x: &str, ys: &[&str], ylabel: &str) -> Self {
        let curves: Vec<String> = ys
            .iter()
            .map(|y| format!("'{}' using '{x}':'{y}' with linespoints", self.csv))
            .collect();
        self.panels.push(format!(
            "set xlabel '{x}'\nset ylabel '{ylabel}'\nplot {}",
            curves.join(", \\\n     ")
        ));
        self
    }

    pub fn render(&self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        for p in &self.panels {
            out.push_str(p);
            out.push('\n');
        }
        if self.lines.iter().any(|l| l.starts_with("set multiplot")) {
            out.push_str("unset multiplot\n");
        }
        out
    }
}
