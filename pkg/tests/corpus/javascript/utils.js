let lodash = require('lodash');

const doubled = lodash.map([1, 2, 3], n => n * 2);
