//! Plain-text instance format.
//!
//! ```text
//! n m
//! c e_1 e_2 ... e_c      (one line per set, element ids ascending)
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Instance, InstanceError};

pub fn render_instance(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", inst.n_elements(), inst.n_sets());
    for members in inst.sets() {
        let _ = write!(out, "{}", members.len());
        for e in members {
            let _ = write!(out, " {e}");
        }
        out.push('\n');
    }
    out
}

pub fn write_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    fs::write(path, render_instance(inst))?;
    Ok(())
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    parse_instance(&fs::read_to_string(path)?)
}

fn parse_err(line: usize, msg: impl Into<String>) -> InstanceError {
    InstanceError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_ids(line_no: usize, line: &str) -> Result<Vec<usize>, InstanceError> {
    line.split_ascii_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| parse_err(line_no, format!("not a non-negative integer: {tok:?}")))
        })
        .collect()
}

pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let header = parse_ids(1, header)?;
    let [n, m] = header[..] else {
        return Err(parse_err(1, "header must be `n m`"));
    };
    let mut sets = Vec::with_capacity(m);
    for s in 0..m {
        let line_no = s + 2;
        let (_, line) = lines
            .next()
            .ok_or_else(|| parse_err(line_no, format!("expected {m} set lines")))?;
        let ids = parse_ids(line_no, line)?;
        let (&count, members) = ids
            .split_first()
            .ok_or_else(|| parse_err(line_no, "empty set line"))?;
        if members.len() != count {
            return Err(parse_err(
                line_no,
                format!("declared {count} elements, found {}", members.len()),
            ));
        }
        if members.windows(2).any(|w| w[0] >= w[1]) {
            return Err(parse_err(line_no, "element ids must be strictly ascending"));
        }
        if let Some(&e) = members.iter().find(|&&e| e >= n) {
            return Err(parse_err(line_no, format!("element {e} out of range")));
        }
        sets.push(members.to_vec());
    }
    if let Some((line_no, extra)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(parse_err(line_no, format!("trailing content {extra:?}")));
    }
    Instance::new(n, sets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_set() {
        let inst = parse_instance("2 1\n2 0 1\n").unwrap();
        assert_eq!(inst.n_elements(), 2);
        assert_eq!(inst.sets(), &[vec![0, 1]]);
    }

    #[test]
    fn count_mismatch_reports_line() {
        match parse_instance("2 1\n3 0 1\n") {
            Err(InstanceError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn other_malformed_inputs() {
        let line_of = |text: &str| match parse_instance(text) {
            Err(InstanceError::Parse { line, .. }) => line,
            other => panic!("unexpected {other:?}"),
        };
        assert_eq!(line_of(""), 1);
        assert_eq!(line_of("2\n"), 1);
        assert_eq!(line_of("2 2\n1 0\n"), 3);
        assert_eq!(line_of("2 1\n2 1 0\n"), 2);
        assert_eq!(line_of("2 1\n1 x\n"), 2);
        assert_eq!(line_of("2 1\n1 5\n"), 2);
        assert_eq!(line_of("1 1\n1 0\n1 0\n"), 3);
    }

    #[test]
    fn render_is_bit_exact() {
        let inst = Instance::new(3, vec![vec![2, 0], vec![], vec![1]]).unwrap();
        assert_eq!(render_instance(&inst), "3 3\n2 0 2\n0\n1 1\n");
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.txt");
        let inst = Instance::new(4, vec![vec![0, 3], vec![1, 2, 3]]).unwrap();
        write_instance(&inst, &path).unwrap();
        assert_eq!(read_instance(&path).unwrap(), inst);
        assert!(matches!(
            read_instance(dir.path().join("missing")),
            Err(InstanceError::Io(_))
        ));
    }
}
