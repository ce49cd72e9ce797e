"""Near-field beam focusing and tracking for DMA base stations."""
