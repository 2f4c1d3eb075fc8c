COMPONENT_VERSION = "0.3.0"
SERVICE_NAME = "chaining_ucb"
