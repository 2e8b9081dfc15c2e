use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use tcd_dsl::{check_document, error_count, to_json, Diagnostic, Mode};

use super::manifest::{RunManifest, SCHEMA};
use super::{exit, write_json, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// The whole file is source.
    Whole,
    /// Only fenced or verbatim blocks are source.
    Fenced,
}

#[derive(Debug, Args)]
pub(super) struct TcdCheckArgs {
    /// Default: fenced for .md, .markdown and .tex files, whole otherwise.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Also write all diagnostics here as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

fn mode_for(path: &Path, flag: Option<ModeArg>) -> Mode {
    match flag {
        Some(ModeArg::Whole) => Mode::Whole,
        Some(ModeArg::Fenced) => Mode::Fenced,
        None => match path.extension().and_then(|e| e.to_str()) {
            Some("md" | "markdown" | "tex") => Mode::Fenced,
            _ => Mode::Whole,
        },
    }
}

pub(super) fn run(
    args: TcdCheckArgs,
    argv: &[String],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult<i32> {
    let mut manifest = RunManifest::new("tcd-check", argv);
    let mut unreadable = false;
    let mut checked: Vec<(String, Vec<Diagnostic>)> = Vec::new();
    manifest.time("check", || {
        for path in &args.files {
            let name = path.display().to_string();
            match std::fs::read_to_string(path) {
                Ok(text) => {
                    let doc = check_document(&text, mode_for(path, args.mode));
                    checked.push((name, doc.diagnostics));
                }
                Err(e) => {
                    let _ = writeln!(err, "error: {name}: {e}");
                    unreadable = true;
                }
            }
        }
    });

    let (mut errors, mut warnings) = (0, 0);
    for (name, diags) in &checked {
        for d in diags {
            let _ = writeln!(out, "{}", d.render(name));
        }
        errors += error_count(diags);
        warnings += diags.len() - error_count(diags);
    }
    let _ = writeln!(
        err,
        "{} file(s) checked: {errors} error(s), {warnings} warning(s)",
        checked.len()
    );
    if let Some(path) = &args.json {
        let list = to_json(checked.iter().map(|(n, d)| (n.as_str(), d.as_slice())));
        let doc = serde_json::json!({
            "schema": SCHEMA,
            "diagnostics": serde_json::from_str::<serde_json::Value>(&list).expect("to_json emits JSON"),
        });
        write_json(path, &doc)?;
        manifest.write_beside(path)?;
    }
    Ok(if unreadable {
        exit::USAGE
    } else if errors > 0 {
        exit::CHECK_FAILED
    } else {
        exit::OK
    })
}
