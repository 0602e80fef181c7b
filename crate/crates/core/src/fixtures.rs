//! Published data sets used for golden tests and examples.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::mixture::FrequencyTable;

pub const TEN_POINT_COUNTS: [u64; 10] = [22, 2, 0, 1, 1, 4, 7, 15, 22, 26];
pub const FIVE_POINT_COUNTS: [u64; 5] = [25, 8, 15, 16, 36];
pub const FIFTEEN_POINT_A_COUNTS: [u64; 15] = [
    44, 71, 120, 128, 104, 106, 85, 54, 36, 25, 19, 15, 30, 48, 115,
];
pub const FIFTEEN_POINT_B_COUNTS: [u64; 15] =
    [302, 115, 24, 13, 21, 37, 51, 81, 80, 84, 64, 49, 36, 30, 13];
pub const ICE_CREAM_COUNTS: [u64; 5] = [39, 9, 75, 52, 24];
pub const ICE_CREAM_LABELS: [&str; 5] = [
    "ice absent",
    "ice present somewhat low",
    "neutral",
    "ice present somewhat high",
    "ice present very high",
];
pub const HOSPITAL_DAYS_COUNTS: [u64; 15] = [
    9299, 4548, 2882, 1819, 1093, 660, 474, 316, 263, 209, 145, 135, 111, 65, 479,
];
/// Only the fitted CMP column of the hotel-ratings table is published.
pub const HOTEL_FITTED_COUNTS: [u64; 5] = [9, 9, 9, 10, 13];
pub const HOTEL_LABELS: [&str; 5] = ["Terrible", "Poor", "Average", "very good", "Excellent"];

fn table(counts: &[u64]) -> FrequencyTable {
    FrequencyTable::from_counts(counts).expect("fixture counts are valid")
}

fn labelled(counts: &[u64], labels: &[&str]) -> FrequencyTable {
    table(counts)
        .with_labels(labels.iter().map(|s| s.to_string()).collect())
        .expect("fixture labels are unique")
}

/// Simulated 10-point data (n = 100).
pub fn ten_point() -> FrequencyTable {
    table(&TEN_POINT_COUNTS)
}

/// Simulated 5-point data (n = 100).
pub fn five_point() -> FrequencyTable {
    table(&FIVE_POINT_COUNTS)
}

/// Simulated 15-point data (n = 1000), first set.
pub fn fifteen_point_a() -> FrequencyTable {
    table(&FIFTEEN_POINT_A_COUNTS)
}

/// Simulated 15-point data (n = 1000), second set.
pub fn fifteen_point_b() -> FrequencyTable {
    table(&FIFTEEN_POINT_B_COUNTS)
}

/// Ice-cream survey question, 5-point Likert scale.
pub fn ice_cream() -> FrequencyTable {
    labelled(&ICE_CREAM_COUNTS, &ICE_CREAM_LABELS)
}

/// Days in hospital with a censored `15+` top bin.
pub fn hospital_days() -> FrequencyTable {
    let labels: Vec<String> = (1..=14)
        .map(|d| alloc::format!("{d}"))
        .chain(core::iter::once("15+".to_string()))
        .collect();
    table(&HOSPITAL_DAYS_COUNTS)
        .with_labels(labels)
        .expect("fixture labels are unique")
}

/// Hotel ratings, represented by the published fitted CMP column.
pub fn hotel_ratings() -> FrequencyTable {
    labelled(&HOTEL_FITTED_COUNTS, &HOTEL_LABELS)
}
