// nothing here but commentary
/*
 * block comment
 */
