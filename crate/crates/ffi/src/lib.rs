//! C ABI (under construction)
