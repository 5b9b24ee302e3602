//! CLI acceptance: generate, save, load and bound through the binary and
//! compare with direct library calls; validate every report against the schema.

mod common;

use std::process::ExitCode;

use common::{kgframe, report, schema_errors, schema_validator};
use kgframe::constructions::{example1, example2, random_kg_system};
use kgframe::KGSystem;
use kgframe_cli::files::load_system;
use kgframe_cli::report::validate;
use serde_json::Value;

fn same_bits(a: &KGSystem, b: &KGSystem) -> bool {
    let eq = |x: &kgframe::Operator, y: &kgframe::Operator| {
        x.shape() == y.shape()
            && x.iter()
                .zip(y.iter())
                .all(|(p, q)| p.re.to_bits() == q.re.to_bits() && p.im.to_bits() == q.im.to_bits())
    };
    a.system().len() == b.system().len()
        && a.system()
            .blocks()
            .iter()
            .zip(b.system().blocks())
            .all(|(x, y)| eq(x, y))
        && eq(a.k(), b.k())
}

fn number_bits(v: &Value) -> Option<u64> {
    v.as_f64().map(f64::to_bits)
}

fn check() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let schema = schema_validator("report-file.schema.json");
    let cases: Vec<(Vec<&str>, KGSystem)> = vec![
        (vec!["example1", "--n", "16"], example1(16).unwrap()),
        (vec!["example2", "--n", "6"], example2(6).unwrap()),
        (vec!["example2", "--n", "12"], example2(12).unwrap()),
        (
            vec![
                "random", "--n", "5", "--dims", "2,1,3", "--rank-k", "3", "--seed", "7",
            ],
            random_kg_system(5, &[2, 1, 3], 3, 7).unwrap(),
        ),
        (
            vec![
                "random", "--n", "6", "--dims", "1,2", "--rank-k", "2", "--seed", "11",
            ],
            random_kg_system(6, &[1, 2], 2, 11).unwrap(),
        ),
        (
            vec!["random", "--n", "8", "--dims", "4,4,4", "--seed", "3"],
            random_kg_system(8, &[4, 4, 4], 8, 3).unwrap(),
        ),
    ];
    let mut compared = 0;
    for (i, (gen_args, expected)) in cases.iter().enumerate() {
        let file = format!("sys{i}.json");
        let mut args = vec!["gen"];
        args.extend(gen_args);
        args.extend(["-o", &file]);
        let out = kgframe(&args, dir.path());
        if !out.status.success() {
            return Err(format!(
                "gen {gen_args:?} failed: {}",
                String::from_utf8_lossy(&out.stderr)
            ));
        }
        let gen_report = report(&out);

        let loaded = load_system(&dir.path().join(&file))
            .map_err(|e| e.to_string())?
            .value;
        if !same_bits(&loaded, expected) {
            return Err(format!(
                "{file}: loaded system differs from the generated one"
            ));
        }

        let out = kgframe(&["bounds", &file], dir.path());
        if !out.status.success() {
            return Err(format!("bounds {file} exited with {:?}", out.status.code()));
        }
        let bounds_report = report(&out);
        let lib = serde_json::to_value(expected.optimal_bounds()).unwrap();
        let payload = &bounds_report["payload"];
        for key in [
            "besselUpperOpt",
            "gLowerOpt",
            "kgLowerOpt",
            "tightnessConstant",
            "rangeResidual",
        ] {
            if number_bits(&payload[key]) != number_bits(&lib[key])
                || payload[key].is_null() != lib[key].is_null()
            {
                return Err(format!(
                    "{file}: {key} is {} in the report, {} from the library",
                    payload[key], lib[key]
                ));
            }
            compared += 1;
        }
        if payload["tightKG"] != lib["tightKG"] {
            return Err(format!("{file}: tightKG differs"));
        }

        for r in [&gen_report, &bounds_report] {
            validate(r).map_err(|e| format!("{file}: {e}"))?;
            let errors = schema_errors(&schema, r);
            if !errors.is_empty() {
                return Err(format!("{file}: schema violations {errors:?}"));
            }
        }
    }
    Ok(format!("{} systems round-tripped bit-exactly, {compared} bound values identical, all reports schema-valid", cases.len()))
}

fn main() -> ExitCode {
    match check() {
        Ok(detail) => {
            println!("criterion 11 PASS  CLI round trip: {detail}");
            ExitCode::SUCCESS
        }
        Err(detail) => {
            println!("criterion 11 FAIL  CLI round trip: {detail}");
            ExitCode::FAILURE
        }
    }
}
