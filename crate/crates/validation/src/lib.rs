//! Holds the `acceptance` test target, which runs the full experiment suite
//! and prints one PASS/FAIL line per criterion.
