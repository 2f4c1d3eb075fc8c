import logging

from grpc import Compression
from opentelemetry._logs import set_logger_provider
from opentelemetry.exporter.otlp.proto.grpc._log_exporter import (
    OTLPLogExporter,
)
from opentelemetry.sdk._logs import LoggerProvider, LoggingHandler
from opentelemetry.sdk._logs.export import BatchLogRecordProcessor

from ..const import OT_HEADERS, OT_INSECURE
from .shared import get_resource


def setup_otel_logging(endpoint: str, config_hash: str) -> LoggingHandler:
    resource = get_resource(config_hash)

    logger_provider = LoggerProvider(resource=resource)
    set_logger_provider(logger_provider)

    exporter = OTLPLogExporter(
        endpoint=endpoint,
        insecure=OT_INSECURE,
        headers=OT_HEADERS,
        compression=Compression.Gzip,
    )

    logger_provider.add_log_record_processor(BatchLogRecordProcessor(exporter))
    logging_handler = LoggingHandler(
        level=logging.NOTSET, logger_provider=logger_provider
    )
    return logging_handler
