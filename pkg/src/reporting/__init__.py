from src.reporting.spectrum_report import (BandStats, Channel, ChannelTable, ExactSum, ReportState, SpectrumReport,
                                           accumulate, build_report, merge, render, report_document)
