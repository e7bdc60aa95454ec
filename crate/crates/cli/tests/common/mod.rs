//! Helpers for driving the `triage` binary from tests.

#![allow(dead_code)]

use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};

use triage_core::corpus::LabeledCorpus;

pub const BIN: &str = env!("CARGO_BIN_EXE_triage");

/// Writes `corpus` as a three-column CSV (id, description, category).
/// Descriptions are quoted with embedded quotes doubled.
pub fn write_csv(corpus: &LabeledCorpus, path: &Path) {
    let quote = |s: &str| format!("\"{}\"", s.replace('"', "\"\""));
    let mut out = String::from("id,description,category\n");
    for (t, &label) in corpus.tickets().iter().zip(corpus.labels()) {
        let name = corpus.label_map().name(label).unwrap();
        out.push_str(&format!(
            "{},{},{}\n",
            quote(&t.id),
            quote(&t.description),
            quote(name)
        ));
    }
    std::fs::write(path, out).unwrap();
}

pub fn triage(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn triage")
}

/// Runs `triage` and returns stdout, panicking with stderr on failure.
pub fn triage_ok(args: &[&str]) -> String {
    let out = triage(args);
    assert!(
        out.status.success(),
        "triage {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// A running `triage serve` process, killed on drop.
pub struct Server {
    child: Child,
    pub base: String,
}

impl Server {
    pub fn start(model: &Path) -> Self {
        let mut child = Command::new(BIN)
            .args(["serve", "--model"])
            .arg(model)
            .args(["--port", "0"])
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .expect("spawn triage serve");
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap())
            .read_line(&mut line)
            .unwrap();
        let base = line
            .trim()
            .strip_prefix("listening on ")
            .unwrap_or_else(|| panic!("unexpected banner {line:?}"))
            .to_string();
        Self { child, base }
    }

    pub fn url(&self, route: &str) -> String {
        format!("{}{route}", self.base)
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
