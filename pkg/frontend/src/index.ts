export { AggregateRow, loadAggregate, parseAggregate, REQUIRED_COLUMNS, SchemaError } from "./csv.js";
export { bubbleRadius, densityColor, FigureSpec, renderSvg, SelectionError } from "./figure.js";
