//! The line-oriented dataset format.
//!
//! ```text
//! 8 = t = number of Task-types
//! 3 = H = number of Machines
//! 2 = K = number of tasks per Jobs
//! 10 = L = number of Jobs
//! -----+
//! 2 5 1 9 5 6 7 2 / Machine 1.
//! ...
//! -----+
//! 1 2 / Job 1.
//! (1 2) 3 / a two-task block followed by a single-task block
//! 0 / END
//! ```
//!
//! Everything from `/` to the end of a line is a comment. A line whose first
//! token is made only of `-` and `+` is a separator and is skipped entirely.
//! Header lines use their first integer and ignore the rest. On a job line a
//! bare integer is a single-task block and `( ... )` groups one multi-task
//! block. The job list ends at the first line whose first token is `0`.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::model::{Block, Instance, Job, Time, TimeMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("MISSING_HEADER: input ended before {what}")]
    MissingHeader { what: String },
    #[error("BAD_TOKEN at line {line}, column {col}: `{token}`")]
    BadToken {
        line: usize,
        col: usize,
        token: String,
    },
    #[error("ROW_LENGTH at line {line}: expected {expected} entries, found {found}")]
    RowLength {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("MISSING_TERMINATOR: no `0` line after the job list")]
    MissingTerminator,
    #[error("UNBALANCED_PARENS at line {line}, column {col}")]
    UnbalancedParens { line: usize, col: usize },
}

/// Header counts that do not match the content. The job list is
/// self-delimiting, so these never stop parsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseWarning {
    JobCount {
        declared: i64,
        found: usize,
    },
    JobSize {
        job: usize,
        declared: i64,
        found: usize,
    },
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseWarning::JobCount { declared, found } => {
                write!(f, "header declares L = {declared} jobs, file has {found}")
            }
            ParseWarning::JobSize {
                job,
                declared,
                found,
            } => write!(
                f,
                "job {job} has {found} tasks, header declares K = {declared}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(i64),
    Open,
    Close,
    Word(String),
}

#[derive(Debug)]
struct Token {
    tok: Tok,
    col: usize,
}

impl Token {
    fn text(&self) -> String {
        match &self.tok {
            Tok::Int(v) => v.to_string(),
            Tok::Open => "(".into(),
            Tok::Close => ")".into(),
            Tok::Word(w) => w.clone(),
        }
    }

    fn bad(&self, line: usize) -> ParseError {
        ParseError::BadToken {
            line,
            col: self.col,
            token: self.text(),
        }
    }
}

fn tokenize(line: &str) -> Vec<Token> {
    let content = line.split('/').next().unwrap_or("");
    let mut out = Vec::new();
    let mut word = String::new();
    let mut word_col = 0;
    let flush = |word: &mut String, col: usize, out: &mut Vec<Token>| {
        if !word.is_empty() {
            let tok = match word.parse::<i64>() {
                Ok(v) => Tok::Int(v),
                Err(_) => Tok::Word(word.clone()),
            };
            out.push(Token { tok, col });
            word.clear();
        }
    };
    for (i, c) in content.chars().enumerate() {
        let col = i + 1;
        match c {
            '(' | ')' => {
                flush(&mut word, word_col, &mut out);
                let tok = if c == '(' { Tok::Open } else { Tok::Close };
                out.push(Token { tok, col });
            }
            c if c.is_whitespace() => flush(&mut word, word_col, &mut out),
            c => {
                if word.is_empty() {
                    word_col = col;
                }
                word.push(c);
            }
        }
    }
    flush(&mut word, word_col, &mut out);
    out
}

fn is_separator(tokens: &[Token]) -> bool {
    matches!(tokens.first(), Some(Token { tok: Tok::Word(w), .. })
        if w.chars().all(|c| c == '-' || c == '+'))
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    parse_instance_with_warnings(text).map(|(inst, _)| inst)
}

pub fn parse_instance_with_warnings(
    text: &str,
) -> Result<(Instance, Vec<ParseWarning>), ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, tokenize(l)))
        .filter(|(_, toks)| !toks.is_empty() && !is_separator(toks));

    const HEADER: [&str; 4] = [
        "task type count t",
        "machine count H",
        "tasks per job K",
        "job count L",
    ];
    let mut header = [0i64; 4];
    for (idx, (slot, what)) in header.iter_mut().zip(HEADER).enumerate() {
        // t and H size the matrix; K and L are only advisory.
        let min = if idx < 2 { 1 } else { 0 };
        let (line, toks) = lines.next().ok_or_else(|| ParseError::MissingHeader {
            what: what.to_string(),
        })?;
        let first = &toks[0];
        match first.tok {
            Tok::Int(v) if v >= min => *slot = v,
            _ => return Err(first.bad(line)),
        }
    }
    let [t, m, k_declared, l_declared] = header;
    let t = t as usize;
    let m = m as usize;

    let mut rows: Vec<Vec<Time>> = Vec::with_capacity(m);
    for row in 1..=m {
        let (line, toks) = lines.next().ok_or_else(|| ParseError::MissingHeader {
            what: format!("matrix row {row}"),
        })?;
        let values = toks
            .iter()
            .map(|tk| match tk.tok {
                Tok::Int(v) => Ok(v),
                _ => Err(tk.bad(line)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != t {
            return Err(ParseError::RowLength {
                line,
                expected: t,
                found: values.len(),
            });
        }
        rows.push(values);
    }
    let matrix = TimeMatrix::from_rows(&rows).map_err(|_| ParseError::MissingHeader {
        what: "a matrix with at least one machine and one task type".to_string(),
    })?;

    let mut jobs = Vec::new();
    let mut terminated = false;
    for (line, toks) in lines {
        if toks[0].tok == Tok::Int(0) {
            terminated = true;
            break;
        }
        jobs.push(parse_job(line, &toks)?);
    }
    if !terminated {
        return Err(ParseError::MissingTerminator);
    }

    let mut warnings = Vec::new();
    if l_declared != jobs.len() as i64 {
        warnings.push(ParseWarning::JobCount {
            declared: l_declared,
            found: jobs.len(),
        });
    }
    for (j, job) in jobs.iter().enumerate() {
        if job.size() as i64 != k_declared {
            warnings.push(ParseWarning::JobSize {
                job: j + 1,
                declared: k_declared,
                found: job.size(),
            });
        }
    }
    Ok((Instance::new(matrix, jobs), warnings))
}

fn parse_job(line: usize, toks: &[Token]) -> Result<Job, ParseError> {
    let mut blocks = Vec::new();
    let mut group: Option<Vec<usize>> = None;
    let mut open_col = 0;
    for tk in toks {
        match (&tk.tok, group.as_mut()) {
            (Tok::Int(v), _) if *v < 0 => return Err(tk.bad(line)),
            (Tok::Int(v), Some(g)) => g.push(*v as usize),
            (Tok::Int(v), None) => blocks.push(Block::new(vec![*v as usize])),
            (Tok::Open, None) => {
                group = Some(Vec::new());
                open_col = tk.col;
            }
            (Tok::Close, Some(_)) => blocks.push(Block::new(group.take().unwrap())),
            (Tok::Open, Some(_)) | (Tok::Close, None) => {
                return Err(ParseError::UnbalancedParens { line, col: tk.col })
            }
            (Tok::Word(_), _) => return Err(tk.bad(line)),
        }
    }
    if group.is_some() {
        return Err(ParseError::UnbalancedParens {
            line,
            col: open_col,
        });
    }
    Ok(Job::new(blocks))
}

/// Canonical text for `instance`. The header's K is the common job size, or
/// the largest one when sizes differ.
pub fn write_instance(instance: &Instance) -> String {
    let sizes: Vec<usize> = instance.jobs().iter().map(Job::size).collect();
    let k = sizes.iter().copied().max().unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "{} = t = number of Task-types", instance.task_types());
    let _ = writeln!(out, "{} = H = number of Machines", instance.machines());
    let _ = writeln!(out, "{k} = K = number of tasks per Jobs");
    let _ = writeln!(out, "{} = L = number of Jobs", instance.jobs().len());
    for (i, row) in instance.matrix().rows().enumerate() {
        let cells: Vec<String> = row.iter().map(Time::to_string).collect();
        let _ = writeln!(out, "{} / Machine {}.", cells.join(" "), i + 1);
    }
    for (j, job) in instance.jobs().iter().enumerate() {
        let _ = writeln!(out, "{} / Job {}.", job_line(job), j + 1);
    }
    out.push_str("0 / END\n");
    out
}

fn job_line(job: &Job) -> String {
    let parts: Vec<String> = job
        .blocks()
        .iter()
        .map(|b| match b.tasks() {
            [single] => single.to_string(),
            many => {
                let inner: Vec<String> = many.iter().map(usize::to_string).collect();
                format!("({})", inner.join(" "))
            }
        })
        .collect();
    parts.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::ls4;
    use crate::model::TaskRef;

    pub(crate) const LS4_LISTING: &str = "\
8 = t = number of Task-types
3 = H = number of Machines
2 = K = number of tasks per Jobs
10 = L = number of Jobs
-----+
2 5 1 9 5 6 7 2 / Machine 1. | = I[h,τ]
3 4 8 7 4 1 3 1 / Machine 2. | table of times
4 6 9 8 3 4 6 3 / Machine 3. | necessary for
-----+ Mh for Tτ

1 2 / Job 1.
3 4 / Job 2.
1 3 / Job 3.
2 3 / Job 4.
3 3 / Job 5.
2 6 / Job 6.
5 2 / Job 7.
3 5 / Job 8.
1 6 / Job 9.
4 8 / Job 10.
0 / END
";

    #[test]
    fn parses_the_sample_listing() {
        let (inst, warnings) = parse_instance_with_warnings(LS4_LISTING).unwrap();
        assert!(warnings.is_empty(), "{warnings:?}");
        assert_eq!(inst.task_types(), 8);
        assert_eq!(inst.machines(), 3);
        assert_eq!(inst.jobs().len(), 10);
        assert_eq!(inst.matrix().row(2), &[3, 4, 8, 7, 4, 1, 3, 1]);
        assert_eq!(inst.matrix().entry(2, 6), 1);
        assert_eq!(inst.matrix().entry(3, 8), 3);
        assert_eq!(inst.matrix().entry(1, 4), 9);
        assert!(inst
            .jobs()
            .iter()
            .all(|j| j.blocks().len() == 2 && j.blocks().iter().all(|b| b.len() == 1)));
        assert_eq!(inst, ls4());
    }

    #[test]
    fn parenthesized_blocks() {
        let text = "3\n1\n3\n1\n1 1 1\n(1 2) 3\n0\n";
        let inst = parse_instance(text).unwrap();
        let blocks = inst.jobs()[0].blocks();
        assert_eq!(blocks, &[Block::new(vec![1, 2]), Block::new(vec![3])]);
        assert_eq!(inst.task_type(TaskRef::new(1, 2, 1)), Some(3));

        let tight = parse_instance("3\n1\n3\n1\n1 1 1\n(1 2)3(3)\n0\n").unwrap();
        assert_eq!(tight.jobs()[0].blocks().len(), 3);
    }

    #[test]
    fn missing_terminator() {
        let text = LS4_LISTING.replace("0 / END\n", "");
        assert_eq!(parse_instance(&text), Err(ParseError::MissingTerminator));
    }

    #[test]
    fn header_and_row_errors() {
        assert!(matches!(
            parse_instance("8\n3\n"),
            Err(ParseError::MissingHeader { .. })
        ));
        assert!(matches!(
            parse_instance("2\n2\n1\n1\n1 2\n"),
            Err(ParseError::MissingHeader { .. })
        ));
        assert_eq!(
            parse_instance("2\n1\n1\n1\n1 2 3\n1\n0\n"),
            Err(ParseError::RowLength {
                line: 5,
                expected: 2,
                found: 3
            })
        );
        assert_eq!(
            parse_instance("x = t\n"),
            Err(ParseError::BadToken {
                line: 1,
                col: 1,
                token: "x".into()
            })
        );
        assert_eq!(
            parse_instance("2\n1\n1\n1\n1 a\n"),
            Err(ParseError::BadToken {
                line: 5,
                col: 3,
                token: "a".into()
            })
        );
        assert!(matches!(
            parse_instance("0\n1\n1\n1\n\n1\n0\n"),
            Err(ParseError::BadToken { line: 1, .. })
        ));
    }

    #[test]
    fn paren_errors() {
        let base = "2\n1\n1\n1\n1 1\n";
        assert_eq!(
            parse_instance(&format!("{base}(1 2\n0\n")),
            Err(ParseError::UnbalancedParens { line: 6, col: 1 })
        );
        assert_eq!(
            parse_instance(&format!("{base}1 2)\n0\n")),
            Err(ParseError::UnbalancedParens { line: 6, col: 4 })
        );
        assert_eq!(
            parse_instance(&format!("{base}((1) 2)\n0\n")),
            Err(ParseError::UnbalancedParens { line: 6, col: 2 })
        );
        assert!(matches!(
            parse_instance(&format!("{base}1 -2\n0\n")),
            Err(ParseError::BadToken { line: 6, .. })
        ));
    }

    #[test]
    fn advisory_header_counts() {
        let (inst, w) = parse_instance_with_warnings("1\n1\n2\n5\n4\n1\n1 1\n0\n").unwrap();
        assert_eq!(inst.jobs().len(), 2);
        assert_eq!(
            w,
            vec![
                ParseWarning::JobCount {
                    declared: 5,
                    found: 2
                },
                ParseWarning::JobSize {
                    job: 1,
                    declared: 2,
                    found: 1
                },
            ]
        );
    }

    #[test]
    fn comment_does_not_eat_tokens_before_slash() {
        let inst = parse_instance("1/t\n1/m\n1\n1\n7/x 8\n1/ 2 3\n0/ END 9\n").unwrap();
        assert_eq!(inst.matrix().entry(1, 1), 7);
        assert_eq!(inst.jobs(), &[Job::chain(&[1])]);
    }

    #[test]
    fn negative_entries_round_trip() {
        let inst = parse_instance("2\n2\n1\n1\n-3 4\n5 -6\n2\n0\n").unwrap();
        assert_eq!(inst.matrix().entry(1, 1), -3);
        assert_eq!(parse_instance(&write_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn written_form() {
        let single = Instance::new(
            TimeMatrix::from_rows(&[[7]]).unwrap(),
            vec![Job::chain(&[1])],
        );
        let text = write_instance(&single);
        assert_eq!(text.lines().count(), 7);
        assert_eq!(
            text,
            "1 = t = number of Task-types\n1 = H = number of Machines\n1 = K = number of tasks per Jobs\n1 = L = number of Jobs\n7 / Machine 1.\n1 / Job 1.\n0 / END\n"
        );
        let job = Job::new(vec![Block::new(vec![1, 2]), Block::new(vec![3])]);
        assert_eq!(job_line(&job), "(1 2) 3");
    }

    #[test]
    fn sample_round_trip() {
        let inst = parse_instance(LS4_LISTING).unwrap();
        let again = parse_instance(&write_instance(&inst)).unwrap();
        assert_eq!(inst, again);
        assert!(again.validate().is_ok());
    }
}
