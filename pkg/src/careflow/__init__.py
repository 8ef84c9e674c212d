"""careflow: stochastic census and staffing analysis for long-term care.

Submodules:
    survival      competing-risks lognormal stay model, censored MLE
    sampling      stay-length samplers (total-hazard inversion, latent minimum)
    census        arrival models, resident attribute scenarios, resident CSV
    service_need  rule-based acuity classification, daily staff-time model
    engine        day-granularity discrete-event simulation
    staffing      ratio evaluation, cost ledger, ratio suggestion
    validate      two-sample KS and survival-curve overlay checks
    store         run persistence (directory per run, manifest, index)
    api           HTTP service
    cli           command line entry points
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
