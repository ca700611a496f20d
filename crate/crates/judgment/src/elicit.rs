//! Eliciting a confidence level with a two-urn betting experiment.
//!
//! Each bet pins down how many black balls Urn 1 may hold and how many red
//! balls Urn 2 must hold. The bet a player is just willing to accept maps
//! to a confidence level on a 1/100 grid.

use std::io::{BufRead, Write};

use crate::error::Error;

/// A bet index on the 0..=100 grid. Bet `k` states that Urn 1 holds at
/// most `k` black balls and Urn 2 holds at least `k` red balls, out of 100
/// balls per urn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Bet(u8);

impl Bet {
    pub fn new(index: u32) -> Result<Self, Error> {
        if index > 100 {
            return Err(Error::BetRange { value: index });
        }
        Ok(Bet(index as u8))
    }

    pub fn index(&self) -> u8 {
        self.0
    }

    /// Upper bound on black balls in Urn 1.
    pub fn urn1_black_max(&self) -> u8 {
        self.0
    }

    /// Lower bound on red balls in Urn 2.
    pub fn urn2_red_min(&self) -> u8 {
        self.0
    }
}

/// Confidence level of a bet, `k / 100`.
pub fn bet_to_alpha(bet: Bet) -> f64 {
    bet.index() as f64 / 100.0
}

/// Inverse of [`bet_to_alpha`]. Rejects confidences off the 1/100 grid.
pub fn alpha_to_bet(alpha: f64) -> Result<Bet, Error> {
    if !alpha.is_finite() || !(0.0..=1.0).contains(&alpha) {
        return Err(Error::BetGrid { alpha });
    }
    let scaled = alpha * 100.0;
    let index = scaled.round();
    if (scaled - index).abs() > 1e-9 {
        return Err(Error::BetGrid { alpha });
    }
    Bet::new(index as u32)
}

/// The 101-row bet table. Rows 0 and 100 pin both urns exactly; every
/// other row states the bounds the bet guarantees.
pub fn bet_table() -> String {
    let mut out = String::new();
    out.push_str("  bet  urn 1 white  urn 1 black  urn 2 white  urn 2 red  confidence\n");
    for k in 0u32..=100 {
        let row = match k {
            0 => ("100".into(), "0".into(), "100".into(), "0".into()),
            100 => ("0".into(), "100".into(), "0".into(), "100".into()),
            k => (
                format!("\u{2265}{}", 100 - k),
                format!("\u{2264}{k}"),
                format!("\u{2264}{}", 100 - k),
                format!("\u{2265}{k}"),
            ),
        };
        let alpha = k as f64 / 100.0;
        out.push_str(&format!(
            "  {k:>3}  {:>11}  {:>11}  {:>11}  {:>9}  {alpha:>10.2}\n",
            row.0, row.1, row.2, row.3
        ));
    }
    out
}

const MAX_ATTEMPTS: u32 = 3;

/// Prints the bet table and the payoff story, reads a bet, and returns its
/// confidence level. Allows three attempts at a valid integer in 0..=100;
/// a closed input stream aborts immediately.
pub fn elicit_interactive<R: BufRead, W: Write>(
    input: &mut R,
    output: &mut W,
) -> Result<f64, Error> {
    writeln!(output, "{}", bet_table())?;
    writeln!(
        output,
        "Each urn holds 100 balls. Under bet k, Urn 1 contains at most k black\n\
         balls and Urn 2 contains at least k red balls; the rest are white.\n\
         A black ball drawn from Urn 1 loses you 100 euros. A red ball drawn\n\
         from Urn 2 wins a prize worth exactly as much to you as avoiding that\n\
         loss. Stronger aversion to acting on uncertain data points to a lower\n\
         bet. Your confidence level is the chosen bet divided by 100."
    )?;
    for attempt in 1..=MAX_ATTEMPTS {
        write!(output, "\nbet (0-100): ")?;
        output.flush()?;
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            return Err(Error::InputClosed);
        }
        match line.trim().parse::<u32>().map_err(|_| ()).and_then(|k| Bet::new(k).map_err(|_| ()))
        {
            Ok(bet) => {
                let alpha = bet_to_alpha(bet);
                writeln!(output, "bet {} -> confidence {alpha}", bet.index())?;
                return Ok(alpha);
            }
            Err(()) => {
                writeln!(output, "enter a whole number between 0 and 100 ({attempt}/{MAX_ATTEMPTS})")?;
            }
        }
    }
    Err(Error::BetAttemptsExhausted { attempts: MAX_ATTEMPTS })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(input: &str) -> (Result<f64, Error>, String) {
        let mut reader = input.as_bytes();
        let mut output = Vec::new();
        let result = elicit_interactive(&mut reader, &mut output);
        (result, String::from_utf8(output).unwrap())
    }

    #[test]
    fn bets_map_to_hundredths() {
        assert_eq!(bet_to_alpha(Bet::new(0).unwrap()), 0.0);
        assert_eq!(bet_to_alpha(Bet::new(2).unwrap()), 0.02);
        assert_eq!(bet_to_alpha(Bet::new(100).unwrap()), 1.0);
        assert!(matches!(Bet::new(101), Err(Error::BetRange { value: 101 })));
    }

    #[test]
    fn the_mapping_is_a_bijection() {
        let mut last = -1.0;
        for k in 0..=100u32 {
            let alpha = bet_to_alpha(Bet::new(k).unwrap());
            assert!(alpha > last);
            last = alpha;
            assert_eq!(alpha_to_bet(alpha).unwrap().index() as u32, k);
        }
    }

    #[test]
    fn off_grid_confidences_are_rejected() {
        assert!(matches!(alpha_to_bet(0.034), Err(Error::BetGrid { .. })));
        assert!(matches!(alpha_to_bet(-0.01), Err(Error::BetGrid { .. })));
        assert!(matches!(alpha_to_bet(1.01), Err(Error::BetGrid { .. })));
        assert!(matches!(alpha_to_bet(f64::NAN), Err(Error::BetGrid { .. })));
        assert!(alpha_to_bet(0.05).is_ok());
    }

    #[test]
    fn table_has_exact_end_rows_and_bounded_middle_rows() {
        let table = bet_table();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 102);
        let row = |k: usize| -> Vec<&str> { lines[k + 1].split_whitespace().collect() };
        assert_eq!(row(0), vec!["0", "100", "0", "100", "0", "0.00"]);
        assert_eq!(row(99), vec!["99", "\u{2265}1", "\u{2264}99", "\u{2264}1", "\u{2265}99", "0.99"]);
        assert_eq!(row(100), vec!["100", "0", "100", "0", "100", "1.00"]);
        assert_eq!(row(5), vec!["5", "\u{2265}95", "\u{2264}5", "\u{2264}95", "\u{2265}5", "0.05"]);
    }

    #[test]
    fn a_clean_entry_is_accepted() {
        let (result, output) = run("5\n");
        assert_eq!(result.unwrap(), 0.05);
        assert!(output.contains("bet 5 -> confidence 0.05"));
        assert!(output.contains("black"));
        assert!(output.contains("red"));
    }

    #[test]
    fn an_invalid_entry_gets_a_retry() {
        let (result, output) = run("abc\n7\n");
        assert_eq!(result.unwrap(), 0.07);
        assert!(output.contains("enter a whole number"));
    }

    #[test]
    fn three_bad_entries_exhaust_the_attempts() {
        let (result, _) = run("101\n101\n101\n");
        assert!(matches!(result, Err(Error::BetAttemptsExhausted { attempts: 3 })));
    }

    #[test]
    fn a_closed_stream_aborts() {
        let (result, _) = run("");
        assert!(matches!(result, Err(Error::InputClosed)));
        let (after_retry, _) = run("150\n");
        assert!(matches!(after_retry, Err(Error::InputClosed)));
    }
}
