"""Feature-driven model selection and hyper-parameter prediction for forecasting."""

__version__ = "0.1.0"
