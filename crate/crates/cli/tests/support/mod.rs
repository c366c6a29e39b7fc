//! Golden command corpus and an in-process runner.
#![allow(dead_code)]

use std::path::PathBuf;

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// Runs the CLI in process. Returns (exit code, stdout, stderr).
pub fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("fostat").chain(args.iter().copied());
    let code = fostat::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// Fixed command corpus. `@` expands to the fixture directory.
pub const CORPUS: &[&str] = &[
    "pairing -s @/p10.json -f adj(x1,x2)",
    "pairing -s @/p10.json -f dist(x1,x2)<=2 -f true -f E~x2.~adj(x1,x2)~&~adj(x2,x3)",
    "--json pairing -s @/sos33.json -f adj(x1,x2) -f E>=2~x2.~adj(x1,x2)",
    "eval -s @/star10.json -f A~x2.~x2=x1~|~adj(x1,x2) --assign 1=0",
    "eval -s @/star10.json -f A~x2.~x2=x1~|~adj(x1,x2) --assign 1=3",
    "dist --left @/p10.json --right @/star10.json",
    "--json dist --left @/p10.json --right @/p10.json --n-max 1",
    "break -s @/star10.json --eps 1/2 --r 1",
    "break -s @/rt40.json --eps 1/10 --r 1",
    "--json break -s @/p10.json --eps 1/5 --r 1",
    "split -s @/p10.json --centers 0,9 --d 1",
    "--json split -s @/rt40.json --centers 0 --d 2",
    "residual -s @/sos33.json --r 1",
    "--json residual -s @/rt40.json --r 2",
    "profile -s @/bt23.json --root 0 --d-max 3",
    "interpret --scheme builtin:y_to_f -s @/bt23.json",
    "interpret --scheme builtin:y_to_f -s @/rt40.json --check E~x2.~adj(x1,x2)~&~P(x2) --out /dev/null",
    "--json interpret --scheme builtin:complement -s @/p10.json --check adj(x1,x2) --out /dev/null",
    "rewrite --scheme builtin:y_to_f -f E~x2.~adj(x1,x2)",
    "rewrite --scheme builtin:f_to_y -f R(x1)~|~adj(x1,x2)",
    "fmtp -s @/p10.json --phi true --psi true --a 2 --b 2",
    "--json fmtp -s @/star10.json --phi E>=2~x2.~adj(x1,x2) --psi !E>=2~x2.~adj(x1,x2) --a 9 --b 1",
    "smtp -s @/star10.json --x 0 --y 1,2,3,4,5,6,7,8,9 --a 9 --b 1",
    "skeleton -s @/rt40.json --eps 1/4",
    "skeleton -s @/bt23.json --eps 1/2 --max-depth 2",
    "gen --family star_of_stars --k 2 --m 3",
    "gen --family random_tree --n 12 --seed 3",
    "converge --family path --grid 4..12:4 -f adj(x1,x2) --radius 1",
    "--json converge --family star_of_stars --grid 2,3,4 -f adj(x1,x2) --radius 1 --window 2",
];

/// Splits a corpus line on spaces; `~` stands for a space inside an argument.
pub fn expand(line: &str) -> Vec<String> {
    let dir = golden_dir();
    let dir = dir.to_str().unwrap();
    line.split(' ').map(|t| t.replace('@', dir).replace('~', " ")).collect()
}

/// Runs one corpus line and renders the transcript block compared
/// against `expected.txt`.
pub fn transcript(line: &str, threads: &str) -> String {
    let mut args = vec!["--threads".to_string(), threads.to_string()];
    args.extend(expand(line));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let (code, out, _) = run(&refs);
    format!("$ {line}\n{out}[exit {code}]\n")
}
