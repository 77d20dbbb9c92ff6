//! Line-oriented circuit format.
//!
//! ```text
//! R <ion> <a> <b> <theta> <phi>
//! MS <i> <j> <ai> <bi> <aj> <bj> <J>
//! MPMS <i> <j> <J> <pairs_i> <pairs_j>      pairs as 0-1,2-3
//! GMS <J> <pairs_ion0> <pairs_ion1> ...
//! ```
//! Ions are 0-based, angles in radians, `#` starts a comment.

use super::gate::{NativeGate, Pair};
use crate::error::{Error, Result};

pub fn parse_circuit(src: &str) -> Result<Vec<NativeGate>> {
    let mut out = Vec::new();
    for (ln, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        out.push(parse_line(line).map_err(|msg| Error::Parse { line: ln + 1, msg })?);
    }
    Ok(out)
}

fn parse_line(line: &str) -> std::result::Result<NativeGate, String> {
    let f: Vec<&str> = line.split_whitespace().collect();
    let uint = |s: &str| s.parse::<usize>().map_err(|_| format!("expected an index, got '{s}'"));
    let num = |s: &str| s.parse::<f64>().map_err(|_| format!("expected a number, got '{s}'"));
    let want = |n: usize| if f.len() == n { Ok(()) } else { Err(format!("{} takes {} fields, got {}", f[0], n - 1, f.len() - 1)) };
    match f[0].to_ascii_uppercase().as_str() {
        "R" => {
            want(6)?;
            Ok(NativeGate::r(uint(f[1])?, uint(f[2])?, uint(f[3])?, num(f[4])?, num(f[5])?))
        }
        "MS" => {
            want(8)?;
            Ok(NativeGate::ms(uint(f[1])?, uint(f[2])?, (uint(f[3])?, uint(f[4])?), (uint(f[5])?, uint(f[6])?), num(f[7])?))
        }
        "MPMS" => {
            want(6)?;
            Ok(NativeGate::MultiPairMs {
                ion_i: uint(f[1])?,
                ion_j: uint(f[2])?,
                coupling: num(f[3])?,
                pairs_i: parse_pairs(f[4])?,
                pairs_j: parse_pairs(f[5])?,
            })
        }
        "GMS" => {
            if f.len() < 3 {
                return Err("GMS needs a coupling and one pair list per ion".into());
            }
            let pairs = f[2..].iter().map(|s| parse_pairs(s)).collect::<std::result::Result<Vec<_>, _>>()?;
            Ok(NativeGate::GlobalMs { coupling: num(f[1])?, pairs })
        }
        other => Err(format!("unknown gate '{other}'")),
    }
}

fn parse_pairs(s: &str) -> std::result::Result<Vec<Pair>, String> {
    s.split(',')
        .map(|p| {
            let (a, b) = p.split_once('-').ok_or_else(|| format!("pair '{p}' is not of the form a-b"))?;
            let a = a.parse::<usize>().map_err(|_| format!("bad level '{a}'"))?;
            let b = b.parse::<usize>().map_err(|_| format!("bad level '{b}'"))?;
            Ok((a, b))
        })
        .collect()
}

fn fmt_pairs(p: &[Pair]) -> String {
    p.iter().map(|(a, b)| format!("{a}-{b}")).collect::<Vec<_>>().join(",")
}

pub fn format_gate(g: &NativeGate) -> String {
    match g {
        NativeGate::R { ion, a, b, theta, phi } => format!("R {ion} {a} {b} {theta} {phi}"),
        NativeGate::Ms { ion_i, ion_j, pair_i, pair_j, coupling } => {
            format!("MS {ion_i} {ion_j} {} {} {} {} {coupling}", pair_i.0, pair_i.1, pair_j.0, pair_j.1)
        }
        NativeGate::MultiPairMs { ion_i, ion_j, pairs_i, pairs_j, coupling } => {
            format!("MPMS {ion_i} {ion_j} {coupling} {} {}", fmt_pairs(pairs_i), fmt_pairs(pairs_j))
        }
        NativeGate::GlobalMs { pairs, coupling } => {
            let lists: Vec<String> = pairs.iter().map(|p| fmt_pairs(p)).collect();
            format!("GMS {coupling} {}", lists.join(" "))
        }
    }
}

pub fn format_circuit(gates: &[NativeGate]) -> String {
    let mut s = String::new();
    for g in gates {
        s.push_str(&format_gate(g));
        s.push('\n');
    }
    s
}
