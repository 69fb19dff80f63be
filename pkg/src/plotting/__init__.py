from src.plotting.spectrogram_viz import SliceCollector, plot_slice, save_slice_plots
