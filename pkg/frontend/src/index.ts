export * from "./api";
export * from "./crypto";
export * from "./session";
export * from "./flows";
export * from "./views";
