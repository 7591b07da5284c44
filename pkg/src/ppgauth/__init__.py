"""ppgauth: PPG biometric authentication toolkit.

Preprocessing, CWT scalograms, a hybrid CVT-ConvMixer-LSTM network with its
own autodiff substrate, template-based enrollment/authentication, evaluation
metrics, and a synthetic corpus generator.
"""

__version__ = "0.1.0"
