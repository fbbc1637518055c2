use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

const MINUTES_PER_DAY: u32 = 24 * 60;

/// Wall-clock time at minute resolution, with a day offset relative to the
/// incident date so that sequences running past midnight still order.
///
/// Text form is `H:MM AM|PM`, optionally followed by `+Nd`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClockTime {
    day_offset: u8,
    minute_of_day: u16,
}

impl ClockTime {
    pub fn new(hour24: u32, minute: u32, day_offset: u8) -> Option<Self> {
        if hour24 >= 24 || minute >= 60 {
            return None;
        }
        Some(Self {
            day_offset,
            minute_of_day: (hour24 * 60 + minute) as u16,
        })
    }

    /// Minutes since midnight of the incident date.
    pub fn absolute_minutes(&self) -> i64 {
        i64::from(self.day_offset) * i64::from(MINUTES_PER_DAY) + i64::from(self.minute_of_day)
    }

    pub fn day_offset(&self) -> u8 {
        self.day_offset
    }

    /// Shifts the clock by `minutes`, carrying into the day offset. Returns
    /// `None` if the result would fall before the incident date.
    pub fn shifted(&self, minutes: i64) -> Option<Self> {
        let abs = self.absolute_minutes() + minutes;
        if abs < 0 {
            return None;
        }
        let day = abs / i64::from(MINUTES_PER_DAY);
        let min = abs % i64::from(MINUTES_PER_DAY);
        Some(Self {
            day_offset: u8::try_from(day).ok()?,
            minute_of_day: min as u16,
        })
    }

    /// Signed difference `self - earlier` in minutes.
    pub fn minutes_since(&self, earlier: &ClockTime) -> i64 {
        self.absolute_minutes() - earlier.absolute_minutes()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClockParseError(pub String);

impl fmt::Display for ClockParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "invalid clock time `{}` (expected `H:MM AM|PM` with optional `+Nd`)",
            self.0
        )
    }
}

impl std::error::Error for ClockParseError {}

impl FromStr for ClockTime {
    type Err = ClockParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ClockParseError(s.to_string());
        let mut parts = s.split_whitespace();
        let hm = parts.next().ok_or_else(err)?;
        let meridiem = parts.next().ok_or_else(err)?;
        let day_offset = match parts.next() {
            None => 0,
            Some(tag) => tag
                .strip_prefix('+')
                .and_then(|t| t.strip_suffix('d'))
                .and_then(|n| n.parse::<u8>().ok())
                .ok_or_else(err)?,
        };
        if parts.next().is_some() {
            return Err(err());
        }

        let (h, m) = hm.split_once(':').ok_or_else(err)?;
        if m.len() != 2 {
            return Err(err());
        }
        let hour: u32 = h.parse().map_err(|_| err())?;
        let minute: u32 = m.parse().map_err(|_| err())?;
        if !(1..=12).contains(&hour) {
            return Err(err());
        }
        let hour24 = match meridiem.to_ascii_uppercase().as_str() {
            "AM" => hour % 12,
            "PM" => hour % 12 + 12,
            _ => return Err(err()),
        };
        ClockTime::new(hour24, minute, day_offset).ok_or_else(err)
    }
}

impl fmt::Display for ClockTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hour24 = u32::from(self.minute_of_day) / 60;
        let minute = u32::from(self.minute_of_day) % 60;
        let (hour12, meridiem) = match hour24 {
            0 => (12, "AM"),
            1..=11 => (hour24, "AM"),
            12 => (12, "PM"),
            _ => (hour24 - 12, "PM"),
        };
        write!(f, "{hour12}:{minute:02} {meridiem}")?;
        if self.day_offset > 0 {
            write!(f, " +{}d", self.day_offset)?;
        }
        Ok(())
    }
}
